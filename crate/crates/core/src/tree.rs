//! Rooted trees with dense node ids, root paths and branch decompositions.
//!
//! Nodes are `0..N` with the root at `0` and every parent id smaller than its
//! child id. Branches (subtrees) are contiguous ranges of a preorder, so
//! `x ⪯ y` is an O(1) interval test and summing over a branch is a slice scan.

use thiserror::Error;

pub type NodeId = usize;

pub const ROOT: NodeId = 0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("node {0} is listed more than once")]
    DuplicateNode(NodeId),
    #[error("the root (node 0) cannot have a parent")]
    RootHasParent,
    #[error("node {node} has unknown parent {parent}")]
    UnknownParent { node: NodeId, parent: NodeId },
    #[error("node {node} references parent {parent} that does not precede it")]
    ForwardReference { node: NodeId, parent: NodeId },
    #[error("node {0} is missing, so the tree is disconnected")]
    MissingNode(NodeId),
    #[error("node {node} is out of range for a tree of {node_count} nodes")]
    NodeOutOfRange { node: NodeId, node_count: usize },
    #[error("path index {k} exceeds depth {depth} of node {node}")]
    PathIndex {
        node: NodeId,
        k: usize,
        depth: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    parent: Vec<Option<NodeId>>,
    child_start: Vec<usize>,
    child_list: Vec<NodeId>,
    depth: Vec<usize>,
    preorder: Vec<NodeId>,
    enter: Vec<usize>,
    exit: Vec<usize>,
}

impl Tree {
    /// Builds a tree from `(node, parent)` pairs. Node ids must be `1..N`
    /// with no gaps; the root `0` is implicit.
    pub fn from_parent_pairs(pairs: &[(NodeId, NodeId)]) -> Result<Tree, TreeError> {
        let node_count = pairs.iter().map(|&(n, _)| n + 1).max().unwrap_or(1);
        let mut parent = vec![None; node_count];
        let mut seen = vec![false; node_count];
        for &(node, p) in pairs {
            if node == ROOT {
                return Err(TreeError::RootHasParent);
            }
            if seen[node] {
                return Err(TreeError::DuplicateNode(node));
            }
            seen[node] = true;
            if p >= node_count {
                return Err(TreeError::UnknownParent { node, parent: p });
            }
            if p >= node {
                return Err(TreeError::ForwardReference { node, parent: p });
            }
            parent[node] = Some(p);
        }
        if let Some(missing) = (1..node_count).find(|&i| !seen[i]) {
            return Err(TreeError::MissingNode(missing));
        }
        Ok(Self::from_parents_unchecked(parent))
    }

    /// Builds a tree from a parent array (`None` only at index 0).
    pub fn from_parents(parents: &[Option<NodeId>]) -> Result<Tree, TreeError> {
        if parents.is_empty() {
            return Ok(Self::from_parents_unchecked(vec![None]));
        }
        if parents[0].is_some() {
            return Err(TreeError::RootHasParent);
        }
        let pairs = parents
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, p)| p.map(|p| (i, p)).ok_or(TreeError::MissingNode(i)))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_parent_pairs(&pairs)
    }

    fn from_parents_unchecked(parent: Vec<Option<NodeId>>) -> Tree {
        let n = parent.len();
        let mut counts = vec![0usize; n + 1];
        for p in parent.iter().flatten() {
            counts[*p + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let child_start = counts;
        let mut fill = child_start.clone();
        let mut child_list = vec![0; n.saturating_sub(1)];
        // ids ascend, so each child list comes out sorted
        for (x, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                child_list[fill[p]] = x;
                fill[p] += 1;
            }
        }

        let mut depth = vec![0; n];
        for x in 1..n {
            depth[x] = depth[parent[x].expect("non-root has parent")] + 1;
        }

        let mut preorder = Vec::with_capacity(n);
        let mut enter = vec![0; n];
        let mut exit = vec![0; n];
        let mut stack = vec![ROOT];
        while let Some(x) = stack.pop() {
            enter[x] = preorder.len();
            preorder.push(x);
            let kids = &child_list[child_start[x]..child_start[x + 1]];
            stack.extend(kids.iter().rev());
        }
        let mut size = vec![1usize; n];
        for &x in preorder.iter().rev() {
            if let Some(p) = parent[x] {
                size[p] += size[x];
            }
        }
        for x in 0..n {
            exit[x] = enter[x] + size[x];
        }

        Tree {
            parent,
            child_start,
            child_list,
            depth,
            preorder,
            enter,
            exit,
        }
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn parent(&self, x: NodeId) -> Option<NodeId> {
        self.parent[x]
    }

    pub fn children(&self, x: NodeId) -> &[NodeId] {
        &self.child_list[self.child_start[x]..self.child_start[x + 1]]
    }

    pub fn depth(&self, x: NodeId) -> usize {
        self.depth[x]
    }

    pub fn is_leaf(&self, x: NodeId) -> bool {
        self.children(x).is_empty()
    }

    pub fn max_depth(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// Smallest-id node at maximal depth.
    pub fn deepest_node(&self) -> NodeId {
        let d = self.max_depth();
        (0..self.node_count())
            .find(|&x| self.depth[x] == d)
            .unwrap_or(ROOT)
    }

    /// Nodes in depth-first preorder; each branch is a contiguous run.
    pub fn preorder(&self) -> &[NodeId] {
        &self.preorder
    }

    /// `x ⪯ y`: `x` lies on the path from `y` to the root (or `x == y`).
    pub fn precedes(&self, x: NodeId, y: NodeId) -> bool {
        self.enter[x] <= self.enter[y] && self.enter[y] < self.exit[x]
    }

    /// The branch `B_x` (x and all its descendants) in preorder.
    pub fn branch(&self, x: NodeId) -> &[NodeId] {
        &self.preorder[self.enter[x]..self.exit[x]]
    }

    pub fn branch_size(&self, x: NodeId) -> usize {
        self.exit[x] - self.enter[x]
    }

    pub fn check_node(&self, x: NodeId) -> Result<(), TreeError> {
        if x < self.node_count() {
            Ok(())
        } else {
            Err(TreeError::NodeOutOfRange {
                node: x,
                node_count: self.node_count(),
            })
        }
    }

    /// `ℓ(x)`: the strict ancestors chain from `x` up to, but excluding, the
    /// root. Empty for the root itself.
    pub fn root_path(&self, x: NodeId) -> RootPath {
        let mut nodes = Vec::with_capacity(self.depth[x]);
        let mut cur = x;
        while let Some(p) = self.parent[cur] {
            nodes.push(cur);
            cur = p;
        }
        RootPath { nodes }
    }

    /// The `k`-th ancestor `a_k` of `a`; `a_{d(a)}` is the root.
    pub fn ancestor(&self, a: NodeId, k: usize) -> Result<NodeId, TreeError> {
        let depth = self.depth[a];
        if k > depth {
            return Err(TreeError::PathIndex { node: a, k, depth });
        }
        let mut cur = a;
        for _ in 0..k {
            cur = self.parent[cur].expect("k within depth");
        }
        Ok(cur)
    }

    /// Splits the node set around `a_k`: the branch `B_{a_k}`, its complement
    /// and the side branches `C_{a_k}` hanging off the path above `a_k`.
    pub fn branch_decomposition(
        &self,
        a: NodeId,
        k: usize,
    ) -> Result<BranchDecomposition, TreeError> {
        self.check_node(a)?;
        let ak = self.ancestor(a, k)?;
        let mut branch: Vec<NodeId> = self.branch(ak).to_vec();
        branch.sort_unstable();
        let complement: Vec<NodeId> = (0..self.node_count())
            .filter(|&x| !self.precedes(ak, x))
            .collect();
        let side_branches = complement
            .iter()
            .copied()
            .filter(|&x| !self.precedes(x, ak))
            .collect();
        Ok(BranchDecomposition {
            branch,
            complement,
            side_branches,
        })
    }
}

/// The path `ℓ(x) = [x_0 = x, x_1, …, x_{d(x)-1}]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootPath {
    nodes: Vec<NodeId>,
}

impl RootPath {
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `α_x`, the last node before the root.
    pub fn alpha(&self) -> Option<NodeId> {
        self.nodes.last().copied()
    }

    /// `a_i` for `i ∈ 0..=len`, where index `len` is the root.
    pub fn ancestor(&self, i: usize) -> Option<NodeId> {
        match i.cmp(&self.nodes.len()) {
            std::cmp::Ordering::Less => Some(self.nodes[i]),
            std::cmp::Ordering::Equal => Some(ROOT),
            std::cmp::Ordering::Greater => None,
        }
    }
}

/// Node sets (sorted by id) from [`Tree::branch_decomposition`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchDecomposition {
    pub branch: Vec<NodeId>,
    pub complement: Vec<NodeId>,
    pub side_branches: Vec<NodeId>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star_over_path() -> Tree {
        Tree::from_parent_pairs(&[(1, 0), (2, 0), (3, 1), (4, 1)]).unwrap()
    }

    /// Descendants by walking parent pointers from every node.
    fn brute_branch(t: &Tree, x: NodeId) -> Vec<NodeId> {
        (0..t.node_count())
            .filter(|&y| {
                let mut cur = Some(y);
                while let Some(c) = cur {
                    if c == x {
                        return true;
                    }
                    cur = t.parent(c);
                }
                false
            })
            .collect()
    }

    #[test]
    fn single_edge() {
        let t = Tree::from_parent_pairs(&[(1, 0)]).unwrap();
        assert_eq!(t.node_count(), 2);
        assert_eq!(t.depth(1), 1);
        assert_eq!(t.branch(1), &[1]);
    }

    #[test]
    fn path_of_two() {
        let t = Tree::from_parent_pairs(&[(1, 0), (2, 1)]).unwrap();
        let p = t.root_path(2);
        assert_eq!(p.nodes(), &[2, 1]);
        assert_eq!(p.alpha(), Some(1));
        assert_eq!(t.root_path(1).nodes(), &[1]);
        assert!(t.root_path(ROOT).is_empty());
    }

    #[test]
    fn star_over_path_branches() {
        let t = star_over_path();
        assert_eq!(brute_branch(&t, 1), vec![1, 3, 4]);
        let mut b1 = t.branch(1).to_vec();
        b1.sort();
        assert_eq!(b1, vec![1, 3, 4]);
        assert_eq!(t.branch(2), &[2]);
        assert_eq!(t.children(0), &[1, 2]);
        assert_eq!(t.root_path(3).nodes(), &[3, 1]);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            Tree::from_parent_pairs(&[(1, 0), (1, 0)]),
            Err(TreeError::DuplicateNode(1))
        );
        assert_eq!(
            Tree::from_parent_pairs(&[(1, 0), (2, 5)]),
            Err(TreeError::UnknownParent { node: 2, parent: 5 })
        );
        assert_eq!(
            Tree::from_parent_pairs(&[(1, 2), (2, 0)]),
            Err(TreeError::ForwardReference { node: 1, parent: 2 })
        );
        assert_eq!(
            Tree::from_parent_pairs(&[(1, 0), (3, 1)]),
            Err(TreeError::MissingNode(2))
        );
        assert_eq!(
            Tree::from_parent_pairs(&[(0, 0)]),
            Err(TreeError::RootHasParent)
        );
    }

    #[test]
    fn decomposition_at_root_index_covers_everything() {
        let t = star_over_path();
        let d = t.branch_decomposition(3, 2).unwrap();
        assert_eq!(d.branch, vec![0, 1, 2, 3, 4]);
        assert!(d.complement.is_empty());
        assert!(d.side_branches.is_empty());
    }

    #[test]
    fn decomposition_on_path_has_no_side_branches() {
        let t = Tree::from_parent_pairs(&[(1, 0), (2, 1)]).unwrap();
        let d = t.branch_decomposition(2, 0).unwrap();
        assert_eq!(d.branch, vec![2]);
        assert_eq!(d.complement, vec![0, 1]);
        assert!(d.side_branches.is_empty());
    }

    #[test]
    fn decomposition_with_side_branch() {
        let t = Tree::from_parent_pairs(&[(1, 0), (2, 0), (3, 1)]).unwrap();
        let d = t.branch_decomposition(3, 0).unwrap();
        assert_eq!(d.branch, vec![3]);
        assert_eq!(d.complement, vec![0, 1, 2]);
        assert_eq!(d.side_branches, vec![2]);
        assert_eq!(
            t.branch_decomposition(3, 3),
            Err(TreeError::PathIndex {
                node: 3,
                k: 3,
                depth: 2
            })
        );
    }
}
