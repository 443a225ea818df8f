//! Backfitting Metropolis-within-Gibbs sampler for the sum-of-trees model.
//!
//! One sweep visits each tree in turn: detach its contribution from the
//! running fit, propose a structural move (grow / prune / change) accepted
//! under the depth prior and the integrated-leaf marginal likelihood, then
//! Gibbs-draw all leaf values and re-attach. After the trees, the noise
//! variance is drawn from its scaled-inverse-chi-square full conditional.

use super::tree::{Tree, NIL};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

pub(crate) const P_GROW: f64 = 0.28;
pub(crate) const P_PRUNE: f64 = 0.28;

pub(crate) struct Sampler<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    n: usize,
    p: usize,
    pub trees: Vec<Tree>,
    pub sigma2: f64,
    total_fit: Vec<f64>,
    resid: Vec<f64>,
    sigma_mu2: f64,
    nu: f64,
    lambda: f64,
    p_split: Vec<f64>,
    fixed_sigma2: Option<f64>,
    freeze_trees: bool,
    // Scratch buffers reused across proposals.
    avail: Vec<u32>,
    values: Vec<f64>,
    prunable: Vec<u32>,
    merged: Vec<u32>,
}

impl<'a> Sampler<'a> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        x: &'a [Vec<f64>],
        y: &'a [f64],
        n_trees: usize,
        sigma_mu: f64,
        nu: f64,
        lambda: f64,
        depth_alpha: f64,
        depth_beta: f64,
        sigma2_init: f64,
        fixed_sigma2: Option<f64>,
        freeze_trees: bool,
    ) -> Sampler<'a> {
        let n = y.len();
        let p = x.len();
        let p_split = (0..64)
            .map(|d| depth_alpha * (1.0 + d as f64).powf(-depth_beta))
            .collect();
        Sampler {
            x,
            y,
            n,
            p,
            trees: (0..n_trees).map(|_| Tree::stump(n)).collect(),
            sigma2: fixed_sigma2.unwrap_or(sigma2_init),
            total_fit: vec![0.0; n],
            resid: vec![0.0; n],
            sigma_mu2: sigma_mu * sigma_mu,
            nu,
            lambda,
            p_split,
            fixed_sigma2,
            freeze_trees,
            avail: Vec::with_capacity(p),
            values: Vec::with_capacity(n),
            prunable: Vec::new(),
            merged: Vec::new(),
        }
    }

    /// Marginal log-likelihood contribution of one leaf given residual
    /// count/sum, up to terms that cancel in move ratios.
    fn node_ll(&self, n: f64, s: f64) -> f64 {
        let denom = self.sigma2 + n * self.sigma_mu2;
        0.5 * (self.sigma2 / denom).ln() + self.sigma_mu2 * s * s / (2.0 * self.sigma2 * denom)
    }

    fn leaf_stats(&self, obs: &[u32]) -> (f64, f64) {
        let mut s = 0.0;
        for &i in obs {
            s += self.resid[i as usize];
        }
        (obs.len() as f64, s)
    }

    /// One full sweep over all trees plus the noise-variance draw.
    pub fn sweep(&mut self, rng: &mut ChaCha8Rng) {
        if !self.freeze_trees {
            for t in 0..self.trees.len() {
                self.update_tree(t, rng);
            }
        }
        match self.fixed_sigma2 {
            Some(s2) => self.sigma2 = s2,
            None => {
                let mut sse = 0.0;
                for i in 0..self.n {
                    let e = self.y[i] - self.total_fit[i];
                    sse += e * e;
                }
                let chi = ChiSquared::new(self.nu + self.n as f64).unwrap();
                self.sigma2 = (self.nu * self.lambda + sse) / chi.sample(rng);
            }
        }
    }

    fn update_tree(&mut self, t: usize, rng: &mut ChaCha8Rng) {
        // Detach: subtract this tree's contribution, leaving the partial
        // residual in `resid`.
        let mut tree = std::mem::replace(&mut self.trees[t], Tree::empty());
        for &leaf in &tree.leaves {
            let node = tree.node(leaf);
            for &i in &node.obs {
                self.total_fit[i as usize] -= node.value;
            }
        }
        for i in 0..self.n {
            self.resid[i] = self.y[i] - self.total_fit[i];
        }

        // Structural move.
        if tree.is_stump() {
            self.try_grow(&mut tree, 1.0, rng);
        } else {
            let u: f64 = rng.random();
            if u < P_GROW {
                self.try_grow(&mut tree, P_GROW, rng);
            } else if u < P_GROW + P_PRUNE {
                self.try_prune(&mut tree, rng);
            } else {
                self.try_change(&mut tree, rng);
            }
        }

        // Gibbs leaf values, then re-attach.
        for li in 0..tree.leaves.len() {
            let leaf = tree.leaves[li];
            let (n_l, s_l) = self.leaf_stats(&tree.node(leaf).obs);
            let denom = self.sigma2 + n_l * self.sigma_mu2;
            let post_mean = self.sigma_mu2 * s_l / denom;
            let post_sd = (self.sigma_mu2 * self.sigma2 / denom).sqrt();
            let z: f64 = StandardNormal.sample(rng);
            let value = post_mean + post_sd * z;
            let node = tree.node_mut(leaf);
            node.value = value;
            for &i in &node.obs {
                self.total_fit[i as usize] += value;
            }
        }
        self.trees[t] = tree;
    }

    /// Variables with at least two distinct values among `obs`.
    fn collect_available(&mut self, tree: &Tree, leaf: u32) {
        self.avail.clear();
        let obs = &tree.node(leaf).obs;
        let first = obs[0] as usize;
        'vars: for j in 0..self.p {
            let col = &self.x[j];
            let v0 = col[first];
            for &i in &obs[1..] {
                if col[i as usize] != v0 {
                    self.avail.push(j as u32);
                    continue 'vars;
                }
            }
        }
    }

    /// Distinct observed values of variable `var` in `obs`, sorted ascending.
    fn collect_distinct(&mut self, obs: &[u32], var: usize) {
        self.values.clear();
        let col = &self.x[var];
        for &i in obs {
            self.values.push(col[i as usize]);
        }
        self.values.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        self.values.dedup();
    }

    fn p_split(&self, depth: u32) -> f64 {
        self.p_split
            .get(depth as usize)
            .copied()
            .unwrap_or_else(|| self.p_split[63] * 1e-9)
    }

    fn try_grow(&mut self, tree: &mut Tree, p_grow_here: f64, rng: &mut ChaCha8Rng) {
        let b = tree.n_leaves();
        let leaf = tree.leaves[rng.random_range(0..b)];
        if tree.node(leaf).obs.len() < 2 {
            return;
        }
        self.collect_available(tree, leaf);
        if self.avail.is_empty() {
            return;
        }
        let var = self.avail[rng.random_range(0..self.avail.len())] as usize;
        self.collect_distinct(&tree.node(leaf).obs, var);
        let n_candidates = self.values.len() - 1; // the maximum cannot split
        if n_candidates == 0 {
            return;
        }
        let split = self.values[rng.random_range(0..n_candidates)];

        let (mut n_l, mut s_l) = (0.0, 0.0);
        let (mut n_r, mut s_r) = (0.0, 0.0);
        let col = &self.x[var];
        for &i in &tree.node(leaf).obs {
            let r = self.resid[i as usize];
            if col[i as usize] <= split {
                n_l += 1.0;
                s_l += r;
            } else {
                n_r += 1.0;
                s_r += r;
            }
        }
        let log_lik = self.node_ll(n_l, s_l) + self.node_ll(n_r, s_r)
            - self.node_ll(n_l + n_r, s_l + s_r);

        let depth = tree.node(leaf).depth;
        let ps = self.p_split(depth);
        let ps_child = self.p_split(depth + 1);
        let log_prior = ps.ln() + 2.0 * (1.0 - ps_child).ln() - (1.0 - ps).ln();

        // Prunable count after the grow: the new node becomes prunable; its
        // parent stops being prunable if the sibling is a leaf.
        tree.singly_internal(&mut self.prunable);
        let parent = tree.node(leaf).parent;
        let parent_was_prunable = parent != NIL && {
            let p = tree.node(parent);
            let sibling = if p.left == leaf { p.right } else { p.left };
            tree.node(sibling).is_leaf()
        };
        let w2_after = self.prunable.len() + 1 - usize::from(parent_was_prunable);
        let log_trans =
            P_PRUNE.ln() + (b as f64).ln() - p_grow_here.ln() - (w2_after as f64).ln();

        let log_alpha = log_lik + log_prior + log_trans;
        if rng.random::<f64>().ln() < log_alpha {
            let obs = tree.node(leaf).obs.clone();
            let mut left = Vec::with_capacity(obs.len());
            let mut right = Vec::with_capacity(obs.len());
            for i in obs {
                if col[i as usize] <= split {
                    left.push(i);
                } else {
                    right.push(i);
                }
            }
            tree.grow(leaf, var as u32, split, left, right);
        }
    }

    fn try_prune(&mut self, tree: &mut Tree, rng: &mut ChaCha8Rng) {
        tree.singly_internal(&mut self.prunable);
        let w2 = self.prunable.len();
        debug_assert!(w2 > 0);
        let node = self.prunable[rng.random_range(0..w2)];
        let (l, r) = {
            let n = tree.node(node);
            (n.left, n.right)
        };
        let (n_l, s_l) = self.leaf_stats(&tree.node(l).obs);
        let (n_r, s_r) = self.leaf_stats(&tree.node(r).obs);
        let log_lik = self.node_ll(n_l + n_r, s_l + s_r)
            - self.node_ll(n_l, s_l)
            - self.node_ll(n_r, s_r);

        let depth = tree.node(node).depth;
        let ps = self.p_split(depth);
        let ps_child = self.p_split(depth + 1);
        let log_prior = (1.0 - ps).ln() - ps.ln() - 2.0 * (1.0 - ps_child).ln();

        let b_after = tree.n_leaves() - 1;
        let p_grow_after = if b_after == 1 { 1.0 } else { P_GROW };
        let log_trans =
            p_grow_after.ln() + (w2 as f64).ln() - P_PRUNE.ln() - (b_after as f64).ln();

        if rng.random::<f64>().ln() < log_lik + log_prior + log_trans {
            tree.prune(node);
        }
    }

    fn try_change(&mut self, tree: &mut Tree, rng: &mut ChaCha8Rng) {
        tree.singly_internal(&mut self.prunable);
        debug_assert!(!self.prunable.is_empty());
        let node = self.prunable[rng.random_range(0..self.prunable.len())];
        let (l, r) = {
            let n = tree.node(node);
            (n.left, n.right)
        };
        self.merged.clear();
        self.merged.extend_from_slice(&tree.node(l).obs);
        self.merged.extend_from_slice(&tree.node(r).obs);

        // Candidate rule from the node's own data; the proposal matches the
        // rule prior, so only the likelihoods enter the ratio.
        self.avail.clear();
        let first = self.merged[0] as usize;
        'vars: for j in 0..self.p {
            let col = &self.x[j];
            let v0 = col[first];
            for &i in &self.merged[1..] {
                if col[i as usize] != v0 {
                    self.avail.push(j as u32);
                    continue 'vars;
                }
            }
        }
        if self.avail.is_empty() {
            return;
        }
        let var = self.avail[rng.random_range(0..self.avail.len())] as usize;
        self.values.clear();
        let col = &self.x[var];
        for &i in &self.merged {
            self.values.push(col[i as usize]);
        }
        self.values.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        self.values.dedup();
        let n_candidates = self.values.len() - 1;
        if n_candidates == 0 {
            return;
        }
        let split = self.values[rng.random_range(0..n_candidates)];

        let (n_old_l, s_old_l) = self.leaf_stats(&tree.node(l).obs);
        let (n_old_r, s_old_r) = self.leaf_stats(&tree.node(r).obs);
        let (mut n_new_l, mut s_new_l) = (0.0, 0.0);
        let (mut n_new_r, mut s_new_r) = (0.0, 0.0);
        for &i in &self.merged {
            let rv = self.resid[i as usize];
            if col[i as usize] <= split {
                n_new_l += 1.0;
                s_new_l += rv;
            } else {
                n_new_r += 1.0;
                s_new_r += rv;
            }
        }
        let log_alpha = self.node_ll(n_new_l, s_new_l) + self.node_ll(n_new_r, s_new_r)
            - self.node_ll(n_old_l, s_old_l)
            - self.node_ll(n_old_r, s_old_r);

        if rng.random::<f64>().ln() < log_alpha {
            tree.change(node, var as u32, split, col);
        }
    }

}
