//! Seeded random trees with valid transition probabilities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::ChainSpec;
use crate::tree::{NodeId, Tree};

#[derive(Debug, Clone)]
pub struct Instance {
    pub tree: Tree,
    pub spec: ChainSpec,
    /// A random non-root node whose root path gets exercised.
    pub target: NodeId,
}

/// Random chain on `2..=max_nodes` nodes.
///
/// Shapes mix uniform recursive trees with long paths: each new node hangs
/// off a uniform earlier node, or off the previous node with probability
/// one half. Outgoing weights at each site are uniform in `(0.05, 1)`,
/// normalized, and the self-loop is absent at about half the sites.
pub fn random_instance<R: Rng>(rng: &mut R, max_nodes: usize) -> Instance {
    let n = rng.random_range(2..=max_nodes.max(2));
    let mut parents: Vec<Option<NodeId>> = vec![None];
    for i in 1..n {
        let p = if rng.random_bool(0.5) {
            i - 1
        } else {
            rng.random_range(0..i)
        };
        parents.push(Some(p));
    }
    let tree = Tree::from_parents(&parents).expect("parents precede children");

    let mut spec = ChainSpec::zeros(n);
    let mut weight = || rng.random_range(0.05..1.0);
    for x in 0..n {
        let up = if x == 0 { 0.0 } else { weight() };
        let hold = if weight() < 0.525 { 0.0 } else { weight() };
        let kids: Vec<f64> = tree.children(x).iter().map(|_| weight()).collect();
        // every site has an edge, so the total is positive
        let total = up + hold + kids.iter().sum::<f64>();
        spec.kappa[x] = hold / total;
        if x != 0 {
            spec.mu[x] = up / total;
        }
        for (&c, w) in tree.children(x).iter().zip(kids) {
            spec.lambda[c] = w / total;
        }
    }
    let target = rng.random_range(1..n);
    Instance { tree, spec, target }
}

/// `count` instances from a single seed.
pub fn corpus(seed: u64, count: usize, max_nodes: usize) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_instance(&mut rng, max_nodes))
        .collect()
}
