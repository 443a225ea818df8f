//! Arena-backed binary regression trees for the backfitting sampler.
//!
//! Leaves own the observation-index lists; structural moves shuffle those
//! lists between nodes without touching the rest of the tree. Trees stay
//! small under the depth prior, so whole-tree walks are cheap.

pub(crate) const NIL: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub(crate) struct Node {
    pub parent: u32,
    pub left: u32,
    pub right: u32,
    pub var: u32,
    pub split: f64,
    pub value: f64,
    pub depth: u32,
    pub obs: Vec<u32>,
}

impl Node {
    fn leaf(parent: u32, depth: u32, obs: Vec<u32>) -> Node {
        Node {
            parent,
            left: NIL,
            right: NIL,
            var: 0,
            split: 0.0,
            value: 0.0,
            depth,
            obs,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.left == NIL
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Tree {
    nodes: Vec<Node>,
    free: Vec<u32>,
    root: u32,
    /// Live leaf ids, maintained incrementally (order is arbitrary).
    pub leaves: Vec<u32>,
}

impl Tree {
    /// Allocation-free placeholder for detach-swap during sweeps.
    pub fn empty() -> Tree {
        Tree {
            nodes: Vec::new(),
            free: Vec::new(),
            root: 0,
            leaves: Vec::new(),
        }
    }

    /// Single-leaf tree holding every observation, value 0.
    pub fn stump(n_obs: usize) -> Tree {
        let obs: Vec<u32> = (0..n_obs as u32).collect();
        Tree {
            nodes: vec![Node::leaf(NIL, 0, obs)],
            free: Vec::new(),
            root: 0,
            leaves: vec![0],
        }
    }

    pub fn node(&self, id: u32) -> &Node {
        &self.nodes[id as usize]
    }

    pub fn node_mut(&mut self, id: u32) -> &mut Node {
        &mut self.nodes[id as usize]
    }

    pub fn n_leaves(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_stump(&self) -> bool {
        self.nodes[self.root as usize].is_leaf()
    }

    fn alloc(&mut self, node: Node) -> u32 {
        match self.free.pop() {
            Some(id) => {
                self.nodes[id as usize] = node;
                id
            }
            None => {
                self.nodes.push(node);
                (self.nodes.len() - 1) as u32
            }
        }
    }

    fn remove_leaf_entry(&mut self, id: u32) {
        let pos = self
            .leaves
            .iter()
            .position(|&l| l == id)
            .expect("leaf list out of sync");
        self.leaves.swap_remove(pos);
    }

    /// Internal nodes whose children are both leaves (the prune/change
    /// candidates), collected into `out`.
    pub fn singly_internal(&self, out: &mut Vec<u32>) {
        out.clear();
        for &leaf in &self.leaves {
            let parent = self.nodes[leaf as usize].parent;
            if parent == NIL {
                continue;
            }
            let p = &self.nodes[parent as usize];
            // Visit each candidate once, from its left child.
            if p.left == leaf && self.nodes[p.right as usize].is_leaf() {
                out.push(parent);
            }
        }
    }

    /// Splits `leaf` on (var, split); observations are partitioned by
    /// x <= split into the left child. Both sides must be non-empty.
    pub fn grow(
        &mut self,
        leaf: u32,
        var: u32,
        split: f64,
        left_obs: Vec<u32>,
        right_obs: Vec<u32>,
    ) {
        debug_assert!(!left_obs.is_empty() && !right_obs.is_empty());
        let depth = self.nodes[leaf as usize].depth + 1;
        let l = self.alloc(Node::leaf(leaf, depth, left_obs));
        let r = self.alloc(Node::leaf(leaf, depth, right_obs));
        let node = &mut self.nodes[leaf as usize];
        node.left = l;
        node.right = r;
        node.var = var;
        node.split = split;
        node.obs = Vec::new();
        self.remove_leaf_entry(leaf);
        self.leaves.push(l);
        self.leaves.push(r);
    }

    /// Collapses `node`'s two leaf children back into it.
    pub fn prune(&mut self, node: u32) {
        let (l, r) = {
            let n = &self.nodes[node as usize];
            (n.left, n.right)
        };
        debug_assert!(self.nodes[l as usize].is_leaf() && self.nodes[r as usize].is_leaf());
        let mut obs = std::mem::take(&mut self.nodes[l as usize].obs);
        obs.append(&mut self.nodes[r as usize].obs);
        self.remove_leaf_entry(l);
        self.remove_leaf_entry(r);
        self.free.push(l);
        self.free.push(r);
        let n = &mut self.nodes[node as usize];
        n.left = NIL;
        n.right = NIL;
        n.obs = obs;
        self.leaves.push(node);
    }

    /// Replaces the split rule of a singly-internal node and repartitions its
    /// children's observations.
    pub fn change(&mut self, node: u32, var: u32, split: f64, x_var: &[f64]) {
        let (l, r) = {
            let n = &self.nodes[node as usize];
            (n.left, n.right)
        };
        let mut left_obs = std::mem::take(&mut self.nodes[l as usize].obs);
        let mut right_obs = std::mem::take(&mut self.nodes[r as usize].obs);
        let mut new_left = Vec::with_capacity(left_obs.len() + right_obs.len());
        let mut new_right = Vec::with_capacity(left_obs.len() + right_obs.len());
        for &i in left_obs.iter().chain(right_obs.iter()) {
            if x_var[i as usize] <= split {
                new_left.push(i);
            } else {
                new_right.push(i);
            }
        }
        debug_assert!(!new_left.is_empty() && !new_right.is_empty());
        left_obs.clear();
        right_obs.clear();
        self.nodes[l as usize].obs = new_left;
        self.nodes[r as usize].obs = new_right;
        let n = &mut self.nodes[node as usize];
        n.var = var;
        n.split = split;
    }

    /// Adds this tree's split-variable usage into `counts`.
    pub fn count_split_vars(&self, counts: &mut [u32]) {
        self.for_each_internal(|node| counts[node.var as usize] += 1);
    }

    #[cfg(test)]
    pub fn n_internal(&self) -> usize {
        let mut k = 0;
        self.for_each_internal(|_| k += 1);
        k
    }

    fn for_each_internal<F: FnMut(&Node)>(&self, mut f: F) {
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id as usize];
            if !node.is_leaf() {
                f(node);
                stack.push(node.left);
                stack.push(node.right);
            }
        }
    }

    /// Tallies (internal, total) node counts per depth into `tally`,
    /// extending it as needed.
    pub fn tally_depths(&self, tally: &mut Vec<(u64, u64)>) {
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id as usize];
            let d = node.depth as usize;
            if tally.len() <= d {
                tally.resize(d + 1, (0, 0));
            }
            tally[d].1 += 1;
            if !node.is_leaf() {
                tally[d].0 += 1;
                stack.push(node.left);
                stack.push(node.right);
            }
        }
    }
}
