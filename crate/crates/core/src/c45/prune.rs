use statrs::distribution::{ContinuousCDF, Normal};

use super::{C45Params, Node};
use crate::{Error, Result};

/// Standard-normal quantile `z` with upper-tail probability `cf`.
fn z_for(cf: f64) -> Result<f64> {
    if !(cf > 0.0 && cf <= 0.5) {
        return Err(Error::InvalidArgument(format!(
            "confidence factor {cf} outside (0, 0.5]"
        )));
    }
    let normal = Normal::standard();
    Ok(normal.inverse_cdf(1.0 - cf))
}

/// Upper confidence limit on the error rate of a node with `errors` mistakes
/// out of `cases`, using the normal approximation to the binomial:
///
/// `U = (f + z²/2N + z·sqrt(f/N − f²/N + z²/4N²)) / (1 + z²/N)` with `f = E/N`.
///
/// Zero cases give zero.
pub fn pessimistic_error_rate(errors: f64, cases: f64, confidence_factor: f64) -> Result<f64> {
    let z = z_for(confidence_factor)?;
    Ok(upper_bound(errors, cases, z))
}

fn upper_bound(errors: f64, cases: f64, z: f64) -> f64 {
    if cases <= 0.0 {
        return 0.0;
    }
    let n = cases;
    let f = errors / n;
    let z2 = z * z;
    let radicand = (f / n - f * f / n + z2 / (4.0 * n * n)).max(0.0);
    (f + z2 / (2.0 * n) + z * radicand.sqrt()) / (1.0 + z2 / n)
}

/// Estimated errors of a node if it were a leaf: `N · U(E, N, CF)`.
fn leaf_estimate(node: &Node, z: f64) -> f64 {
    let cases = node.cases();
    if cases <= 0.0 {
        return 0.0;
    }
    // Errors against the node's own training counts. For internal nodes the
    // distribution holds exactly those counts.
    let d = node.distribution();
    let errors = cases - d.weights()[d.majority()] * cases / d.total();
    cases * upper_bound(errors, cases, z)
}

fn prune_node(node: &Node, z: f64) -> (Node, f64) {
    match node {
        Node::Leaf { .. } => (node.clone(), leaf_estimate(node, z)),
        Node::Split {
            test,
            distribution,
            cases,
            children,
        } => {
            let mut subtree = 0.0;
            let mut pruned = Vec::with_capacity(children.len());
            for c in children {
                let (p, est) = prune_node(c, z);
                subtree += est;
                pruned.push(p);
            }
            let as_leaf = leaf_estimate(node, z);
            if as_leaf <= subtree {
                (
                    Node::Leaf {
                        distribution: distribution.clone(),
                        cases: *cases,
                    },
                    as_leaf,
                )
            } else {
                (
                    Node::Split {
                        test: test.clone(),
                        distribution: distribution.clone(),
                        cases: *cases,
                        children: pruned,
                    },
                    subtree,
                )
            }
        }
    }
}

/// Error-based pruning by subtree replacement, bottom-up. A subtree collapses
/// to a leaf when the leaf's estimated errors do not exceed the summed
/// estimates of the subtree's leaves.
pub fn prune_ebp(root: &Node, params: &C45Params) -> Result<Node> {
    let z = z_for(params.confidence_factor)?;
    Ok(prune_node(root, z).0)
}
