use std::fmt::Write;

use super::{DecisionTree, Node, SplitTest};
use crate::dataset::AttributeKind;

impl DecisionTree {
    /// Indented text rendering, one test per line, in the J48 style:
    ///
    /// ```text
    /// outlook = sunny
    /// |   humidity <= 77.5: yes (2.0)
    /// |   humidity > 77.5: no (3.0)
    /// outlook = overcast: yes (4.0)
    /// ```
    ///
    /// Leaf annotations are `(cases)` or `(cases/errors)`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        match &self.root {
            Node::Leaf { .. } => {
                let _ = writeln!(out, ": {}", self.leaf_label(&self.root));
            }
            Node::Split { .. } => self.render_node(&self.root, 0, &mut out),
        }
        out
    }

    fn leaf_label(&self, node: &Node) -> String {
        let d = node.distribution();
        let class = &self.classes[d.majority()];
        let cases = node.cases();
        let errors = if d.total() > 0.0 {
            cases - d.weights()[d.majority()] * cases / d.total()
        } else {
            0.0
        };
        if errors > 1e-9 {
            format!("{class} ({cases:.1}/{errors:.1})")
        } else {
            format!("{class} ({cases:.1})")
        }
    }

    fn render_node(&self, node: &Node, depth: usize, out: &mut String) {
        let Node::Split { test, children, .. } = node else {
            return;
        };
        let name = &self.attributes[test.attribute()].name;
        for (b, child) in children.iter().enumerate() {
            let condition = match (test, &self.attributes[test.attribute()].kind) {
                (SplitTest::Nominal { .. }, AttributeKind::Nominal(values)) => format!("{name} = {}", values[b]),
                (SplitTest::Numeric { threshold, .. }, _) if b == 0 => format!("{name} <= {threshold}"),
                (SplitTest::Numeric { threshold, .. }, _) => format!("{name} > {threshold}"),
                _ => format!("{name} #{b}"),
            };
            out.push_str(&"|   ".repeat(depth));
            out.push_str(&condition);
            if child.is_leaf() {
                let _ = writeln!(out, ": {}", self.leaf_label(child));
            } else {
                out.push('\n');
                self.render_node(child, depth + 1, out);
            }
        }
    }
}
