use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Depth class of a node in the three-level code tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    /// High-level concept grouping, e.g. coronary heart disease.
    Concept,
    /// Three-character category, e.g. `I21`.
    Major,
    /// Four-character subcategory, e.g. `I21.0`. Always a leaf.
    Minor,
}

impl Level {
    fn below(self) -> Option<Level> {
        match self {
            Level::Concept => Some(Level::Major),
            Level::Major => Some(Level::Minor),
            Level::Minor => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeNode {
    pub code: String,
    pub title: String,
    pub level: Level,
    parent: Option<usize>,
    children: Vec<usize>,
}

/// Hierarchy file node.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    code: String,
    #[serde(default)]
    title: String,
    #[serde(default)]
    level: Option<Level>,
    #[serde(default)]
    children: Vec<RawNode>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawDocument {
    Wrapped {
        roots: Vec<RawNode>,
        #[serde(default = "default_prefix_rule")]
        prefix_rule: bool,
    },
    Many(Vec<RawNode>),
    One(RawNode),
}

fn default_prefix_rule() -> bool {
    true
}

/// A validated concept → major → minor code tree, stored as an arena.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeHierarchy {
    nodes: Vec<CodeNode>,
    roots: Vec<usize>,
    index: HashMap<String, usize>,
    prefix_rule: bool,
}

impl CodeHierarchy {
    /// Parses a hierarchy document.
    ///
    /// The document is a node (`{"code", "title", "children"}`), an array of
    /// nodes, or `{"roots": [...], "prefix_rule": bool}`. Top-level nodes are
    /// concepts and each child sits one level below its parent unless a node
    /// states its `level` explicitly. The prefix rule (minor codes start with
    /// their major code and a `.`) is on unless the wrapped form turns it off.
    pub fn from_json(content: &str) -> Result<Self> {
        let (roots, prefix_rule) = match serde_json::from_str::<RawDocument>(content)? {
            RawDocument::Wrapped { roots, prefix_rule } => (roots, prefix_rule),
            RawDocument::Many(roots) => (roots, true),
            RawDocument::One(root) => (vec![root], true),
        };
        let mut h = CodeHierarchy {
            nodes: Vec::new(),
            roots: Vec::new(),
            index: HashMap::new(),
            prefix_rule,
        };
        for raw in roots {
            let idx = h.insert(raw, None, Level::Concept)?;
            h.roots.push(idx);
        }
        Ok(h)
    }

    fn insert(&mut self, raw: RawNode, parent: Option<usize>, default_level: Level) -> Result<usize> {
        let code = raw.code.trim().to_owned();
        if code.is_empty() {
            return Err(Error::Hierarchy("node with an empty code".into()));
        }
        if self.index.contains_key(&code) {
            return Err(Error::Hierarchy(format!("duplicate code `{code}`")));
        }
        let level = raw.level.unwrap_or(default_level);
        if let Some(p) = parent {
            let parent_node = &self.nodes[p];
            if parent_node.level.below() != Some(level) {
                return Err(Error::Hierarchy(format!(
                    "`{code}` ({level:?}) cannot sit under `{}` ({:?})",
                    parent_node.code, parent_node.level
                )));
            }
            if self.prefix_rule && level == Level::Minor && !code.starts_with(&format!("{}.", parent_node.code)) {
                return Err(Error::Hierarchy(format!(
                    "minor code `{code}` does not extend its major `{}`",
                    parent_node.code
                )));
            }
        }
        if level == Level::Minor && !raw.children.is_empty() {
            return Err(Error::Hierarchy(format!("minor code `{code}` has children")));
        }
        let idx = self.nodes.len();
        self.nodes.push(CodeNode {
            code: code.clone(),
            title: raw.title,
            level,
            parent,
            children: Vec::new(),
        });
        self.index.insert(code, idx);
        let child_level = level.below().unwrap_or(Level::Minor);
        for child in raw.children {
            let c = self.insert(child, Some(idx), child_level)?;
            self.nodes[idx].children.push(c);
        }
        Ok(idx)
    }

    pub fn prefix_rule(&self) -> bool {
        self.prefix_rule
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, code: &str) -> bool {
        self.index.contains_key(code)
    }

    pub fn node(&self, code: &str) -> Option<&CodeNode> {
        self.index.get(code).map(|&i| &self.nodes[i])
    }

    pub fn roots(&self) -> impl Iterator<Item = &CodeNode> {
        self.roots.iter().map(|&i| &self.nodes[i])
    }

    pub fn children(&self, code: &str) -> Result<Vec<&CodeNode>> {
        let idx = self.lookup(code)?;
        Ok(self.nodes[idx].children.iter().map(|&c| &self.nodes[c]).collect())
    }

    /// All nodes at `level`, in document order.
    pub fn at_level(&self, level: Level) -> impl Iterator<Item = &CodeNode> {
        self.nodes.iter().filter(move |n| n.level == level)
    }

    /// Codes above `code`, nearest first: a minor yields `[major, concept]`.
    pub fn ancestors(&self, code: &str) -> Result<Vec<&str>> {
        let mut cur = self.nodes[self.lookup(code)?].parent;
        let mut out = Vec::new();
        while let Some(p) = cur {
            out.push(self.nodes[p].code.as_str());
            cur = self.nodes[p].parent;
        }
        Ok(out)
    }

    fn lookup(&self, code: &str) -> Result<usize> {
        self.index
            .get(code)
            .copied()
            .ok_or_else(|| Error::UnknownCode(code.to_owned()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"{"code":"CHD","title":"Coronary heart disease","children":[
        {"code":"I21","title":"Acute myocardial infarction","children":[
            {"code":"I21.0","title":"anterior wall"},
            {"code":"I21.9","title":"unspecified"}]}]}"#;

    #[test]
    fn small_tree_levels() {
        let h = CodeHierarchy::from_json(SMALL).unwrap();
        assert_eq!(h.len(), 4);
        assert_eq!(h.node("CHD").unwrap().level, Level::Concept);
        assert_eq!(h.node("I21").unwrap().level, Level::Major);
        assert_eq!(h.node("I21.9").unwrap().level, Level::Minor);
        assert_eq!(h.ancestors("I21.0").unwrap(), ["I21", "CHD"]);
        assert!(h.ancestors("CHD").unwrap().is_empty());
        assert!(matches!(h.ancestors("I99"), Err(Error::UnknownCode(_))));
    }

    #[test]
    fn prefix_violation() {
        let bad = SMALL.replace("\"I21.9\"", "\"I22.0\"");
        assert!(matches!(CodeHierarchy::from_json(&bad), Err(Error::Hierarchy(_))));
        let off = format!(r#"{{"prefix_rule": false, "roots": [{bad}]}}"#);
        assert!(CodeHierarchy::from_json(&off).is_ok());
    }

    #[test]
    fn duplicate_code() {
        let bad = SMALL.replace("\"I21.9\"", "\"I21.0\"");
        assert!(matches!(CodeHierarchy::from_json(&bad), Err(Error::Hierarchy(_))));
    }

    #[test]
    fn level_violations() {
        let too_deep =
            r#"{"code":"C","children":[{"code":"M","children":[{"code":"M.1","children":[{"code":"M.1.1"}]}]}]}"#;
        assert!(CodeHierarchy::from_json(too_deep).is_err());
        let explicit = r#"{"code":"C","children":[{"code":"C.1","level":"minor"}]}"#;
        assert!(CodeHierarchy::from_json(explicit).is_err());
    }

    #[test]
    fn explicit_major_root() {
        let h = CodeHierarchy::from_json(r#"[{"code":"I20","level":"major","children":[{"code":"I20.0"}]}]"#).unwrap();
        assert_eq!(h.node("I20.0").unwrap().level, Level::Minor);
        assert_eq!(h.ancestors("I20.0").unwrap(), ["I20"]);
    }
}
