use rayon::prelude::*;

use super::split::score_branches;
use super::{best_numeric_threshold, C45Params, Node, SplitScore, SplitTest, TrainingSet};
use crate::{Error, Result};

/// Gains below this are treated as zero.
const GAIN_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone)]
struct Candidate {
    test: SplitTest,
    score: SplitScore,
}

fn evaluate(set: &TrainingSet<'_>, rows: &[usize], attribute: usize, params: &C45Params) -> Option<Candidate> {
    let candidate = if set.attributes()[attribute].is_numeric() {
        let best = best_numeric_threshold(set, rows, attribute, params.min_leaf)?;
        Candidate {
            test: SplitTest::Numeric {
                attribute,
                threshold: best.threshold,
            },
            score: best.score,
        }
    } else {
        let test = SplitTest::Nominal { attribute };
        let branches: Vec<_> = set.partition(rows, &test).iter().map(|b| set.distribution(b)).collect();
        let big_enough = branches.iter().filter(|b| b.total() >= params.min_leaf as f64).count();
        if big_enough < 2 {
            return None;
        }
        let score = score_branches(&set.distribution(rows), &branches)?;
        Candidate { test, score }
    };
    Some(candidate)
}

/// Highest gain ratio among candidates with at least average gain. The scan
/// runs in attribute order and only a strictly better ratio replaces the
/// incumbent, so ties go to the lowest attribute index.
fn select(candidates: &[Candidate]) -> Option<&Candidate> {
    if candidates.is_empty() {
        return None;
    }
    let mean = candidates.iter().map(|c| c.score.info_gain).sum::<f64>() / candidates.len() as f64;
    let floor = mean - GAIN_EPSILON * mean.abs().max(1.0);
    let mut best: Option<&Candidate> = None;
    for c in candidates.iter().filter(|c| c.score.info_gain >= floor) {
        if best.is_none_or(|b| c.score.gain_ratio > b.score.gain_ratio) {
            best = Some(c);
        }
    }
    best
}

fn grow_node(set: &TrainingSet<'_>, rows: &[usize], params: &C45Params, depth: usize) -> Node {
    let distribution = set.distribution(rows);
    let cases = rows.len() as f64;
    let leaf = |distribution| Node::Leaf { distribution, cases };
    if distribution.is_pure() || rows.len() < 2 * params.min_leaf || params.max_depth.is_some_and(|d| depth >= d) {
        return leaf(distribution);
    }
    let n_attr = set.attributes().len();
    let evaluated: Vec<Option<Candidate>> = if params.parallel {
        (0..n_attr)
            .into_par_iter()
            .map(|a| evaluate(set, rows, a, params))
            .collect()
    } else {
        (0..n_attr).map(|a| evaluate(set, rows, a, params)).collect()
    };
    let (informative, flat): (Vec<Candidate>, Vec<Candidate>) = evaluated
        .into_iter()
        .flatten()
        .partition(|c| c.score.info_gain > GAIN_EPSILON);
    let chosen = match select(&informative) {
        Some(c) => c,
        // min_leaf 1 grows until leaves are pure or inseparable, so a
        // zero-gain split (e.g. one half of an XOR) is still taken
        None if params.min_leaf == 1 => match select(&flat) {
            Some(c) => c,
            None => return leaf(distribution),
        },
        None => return leaf(distribution),
    };
    let children = set
        .partition(rows, &chosen.test)
        .iter()
        .map(|branch| {
            if branch.is_empty() {
                Node::Leaf {
                    distribution: distribution.clone(),
                    cases: 0.0,
                }
            } else {
                grow_node(set, branch, params, depth + 1)
            }
        })
        .collect();
    Node::Split {
        test: chosen.test.clone(),
        distribution,
        cases,
        children,
    }
}

/// Grows an unpruned tree over `rows` of `set`.
///
/// A node becomes a leaf when it is pure, when it is at `max_depth`, or when
/// no attribute offers a split with positive gain that puts at least
/// `min_leaf` cases on two branches. With `min_leaf = 1` a split without gain
/// is accepted when nothing better exists, so any data without conflicting
/// duplicates is fitted exactly. Branches that receive no cases become leaves
/// carrying the parent's class counts.
pub fn grow(set: &TrainingSet<'_>, rows: &[usize], params: &C45Params) -> Result<Node> {
    if rows.is_empty() {
        return Err(Error::Empty("training rows"));
    }
    params.validate()?;
    Ok(grow_node(set, rows, params, 0))
}
