//! Patch-local Bayes recovery of noisy classical distributions and Markov
//! length fits.

use crate::distribution::{tv, DiscreteDistribution};
use crate::error::{Error, Result};
use crate::graph::{Hypergraph, Region};
use crate::noise::{apply_channel, apply_process, LayeredProcess, LocalChannel};
use crate::space::{Budget, StateSpace};

/// Stochastic map that resamples the patch from its posterior given the noisy
/// patch and the noisy collar (sites within distance `radius`).
#[derive(Debug, Clone, PartialEq)]
pub struct PatchRecovery {
    patch: Region,
    collar: Region,
    radius: usize,
    window: Region,
    window_space: StateSpace,
    patch_space: StateSpace,
    /// `kernel[w * |patch states| + x] = R(x_patch | window config w)`.
    kernel: Vec<f64>,
}

impl PatchRecovery {
    pub fn patch(&self) -> &Region {
        &self.patch
    }

    pub fn collar(&self) -> &Region {
        &self.collar
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// `R(x_patch | noisy window)`; `window` lists the window sites in order.
    pub fn prob(&self, x_patch: &[usize], window: &[usize]) -> f64 {
        let w = self.window_space.encode(window);
        self.kernel[w * self.patch_space.size() + self.patch_space.encode(x_patch)]
    }

    /// Largest deviation of a column sum from one.
    pub fn stochasticity_error(&self) -> f64 {
        let k = self.patch_space.size();
        self.kernel
            .chunks(k)
            .map(|col| (col.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `Q'(z) = Σ_y Q(z with patch ← y) · R(z_patch | window of that config)`.
    pub fn apply(&self, q: &DiscreteDistribution) -> Result<DiscreteDistribution> {
        let space = q.space();
        let patch_pos = q.positions(&self.patch)?;
        let window_pos = q.positions(&self.window)?;
        let patch_in_window: Vec<usize> = self
            .patch
            .iter()
            .map(|v| self.window.position(v).expect("patch ⊆ window"))
            .collect();
        let k = self.patch_space.size();
        let mut out = vec![0.0; q.len()];
        let mut z = vec![0; space.dims().len()];
        let mut w = vec![0; self.window.len()];
        for (idx, o) in out.iter_mut().enumerate() {
            space.decode_into(idx, &mut z);
            let x_patch: Vec<usize> = patch_pos.iter().map(|&p| z[p]).collect();
            let x_idx = self.patch_space.encode(&x_patch);
            for (wi, &p) in w.iter_mut().zip(&window_pos) {
                *wi = z[p];
            }
            let mut acc = 0.0;
            let mut y = vec![0; self.patch.len()];
            for yi in 0..k {
                self.patch_space.decode_into(yi, &mut y);
                let mut zz_idx = idx;
                for (j, &p) in patch_pos.iter().enumerate() {
                    let stride = space.strides()[p];
                    zz_idx = zz_idx - z[p] * stride + y[j] * stride;
                    w[patch_in_window[j]] = y[j];
                }
                let r = self.kernel[self.window_space.encode(&w) * k + x_idx];
                acc += q.probs()[zz_idx] * r;
            }
            *o = acc;
        }
        DiscreteDistribution::from_weights(q.variables().to_vec(), space.dims().to_vec(), out)
    }
}

/// Sites at distance `1..=radius` from `patch`.
pub fn collar(g: &Hypergraph, patch: &Region, radius: usize) -> Region {
    g.distances_from(patch)
        .iter()
        .enumerate()
        .filter(|(_, d)| matches!(d, Some(d) if *d >= 1 && *d <= radius))
        .map(|(v, _)| v)
        .collect()
}

/// Bayes reversal of one gate: `pre` is the distribution right before
/// `gate`, the patch is the gate's support. An unreachable noisy window maps
/// the patch to itself.
pub fn build_patch_recovery(
    pre: &DiscreteDistribution,
    gate: &LocalChannel,
    g: &Hypergraph,
    radius: usize,
) -> Result<PatchRecovery> {
    let patch = Region::new(gate.support().iter().copied());
    g.check_region(&patch)?;
    let collar = collar(g, &patch, radius);
    let window = patch.union(&collar);
    let marginal = pre.marginal(&window)?;
    let window_space = marginal.space().clone();
    let patch_dims: Vec<usize> = patch.iter().map(|v| g.dim(v)).collect();
    let patch_space = StateSpace::new(patch_dims);
    let k = patch_space.size();
    let patch_in_window: Vec<usize> = patch.iter().map(|v| window.position(v).unwrap()).collect();
    // channel support order may differ from sorted patch order
    let gate_order: Vec<usize> = gate
        .support()
        .iter()
        .map(|&v| patch.position(v).unwrap())
        .collect();
    let gate_space = StateSpace::new(gate.dims().to_vec());
    let to_gate = |p: &[usize]| -> usize {
        let digits: Vec<usize> = gate_order.iter().map(|&j| p[j]).collect();
        gate_space.encode(&digits)
    };

    let mut kernel = vec![0.0; window_space.size() * k];
    let mut w = vec![0; window.len()];
    let mut x = vec![0; patch.len()];
    for wi in 0..window_space.size() {
        window_space.decode_into(wi, &mut w);
        let y: Vec<usize> = patch_in_window.iter().map(|&j| w[j]).collect();
        let y_gate = to_gate(&y);
        let col = &mut kernel[wi * k..(wi + 1) * k];
        let mut total = 0.0;
        let mut ww = w.clone();
        for (xi, c) in col.iter_mut().enumerate() {
            patch_space.decode_into(xi, &mut x);
            for (j, &pj) in patch_in_window.iter().enumerate() {
                ww[pj] = x[j];
            }
            let prior = marginal.probs()[window_space.encode(&ww)];
            *c = prior * gate.prob(y_gate, to_gate(&x));
            total += *c;
        }
        if total > 0.0 {
            col.iter_mut().for_each(|c| *c /= total);
        } else {
            col.iter_mut().for_each(|c| *c = 0.0);
            col[patch_space.encode(&y)] = 1.0;
        }
    }
    Ok(PatchRecovery {
        patch,
        collar,
        radius,
        window,
        window_space,
        patch_space,
        kernel,
    })
}

/// One recovery per gate, in reverse gate order, each built from the exact
/// distribution right before its gate.
pub fn trotterized_recoveries(
    clean: &DiscreteDistribution,
    proc: &LayeredProcess,
    g: &Hypergraph,
    radius: usize,
    budget: Budget,
) -> Result<Vec<PatchRecovery>> {
    budget.check(clean.dims())?;
    let mut pre = clean.clone();
    let mut out = Vec::new();
    for gate in proc.channels() {
        out.push(build_patch_recovery(&pre, gate, g, radius)?);
        pre = apply_channel(&pre, gate)?;
    }
    out.reverse();
    Ok(out)
}

pub fn apply_recoveries(
    noisy: &DiscreteDistribution,
    recoveries: &[PatchRecovery],
) -> Result<DiscreteDistribution> {
    let mut cur = noisy.clone();
    for r in recoveries {
        cur = r.apply(&cur)?;
    }
    Ok(cur)
}

/// `TV(clean, R(N(clean)))` with `TV = ½ Σ |p − q|`.
pub fn recovery_error(
    clean: &DiscreteDistribution,
    proc: &LayeredProcess,
    recoveries: &[PatchRecovery],
    budget: Budget,
) -> Result<f64> {
    let noisy = apply_process(clean, proc, budget)?;
    let recovered = apply_recoveries(&noisy, recoveries)?;
    Ok(tv(clean.probs(), recovered.probs()))
}

/// `√(I/2)` with `I = I(clean patch : far | noisy patch, collar)` under the
/// joint of the pre-gate state and the gate output. By Pinsker this bounds
/// the TV gap between the patch recovery and exact global Bayes reversal of
/// the single gate.
pub fn patch_recovery_bound(
    pre: &DiscreteDistribution,
    gate: &LocalChannel,
    g: &Hypergraph,
    radius: usize,
) -> Result<f64> {
    let patch = Region::new(gate.support().iter().copied());
    let window = patch.union(&collar(g, &patch, radius));
    let n = g.n();
    let full = g.all_vertices();
    if pre.variable_region() != full {
        return Err(Error::InvalidRegion(
            "pre-gate distribution must cover every site".into(),
        ));
    }
    let ordered = pre.reorder(full.sites())?;
    // variables 0..n hold the post-gate configuration, n.. the clean patch copy
    let mut vars: Vec<usize> = (0..n).collect();
    vars.extend(n..n + patch.len());
    let mut dims: Vec<usize> = g.dims().to_vec();
    dims.extend(patch.iter().map(|v| g.dim(v)));
    let joint_space = StateSpace::new(dims.clone());
    Budget::default().check(&dims)?;
    let gate_space = StateSpace::new(gate.dims().to_vec());
    let mut joint = vec![0.0; joint_space.size()];
    let mut x = vec![0; n];
    for (i, &p) in ordered.probs().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        ordered.space().decode_into(i, &mut x);
        let x_gate: Vec<usize> = gate.support().iter().map(|&v| x[v]).collect();
        let xi = gate_space.encode(&x_gate);
        for yi in 0..gate_space.size() {
            let t = gate.prob(yi, xi);
            if t == 0.0 {
                continue;
            }
            let y_gate = gate_space.decode(yi);
            let mut cfg = x.clone();
            for (&v, &yv) in gate.support().iter().zip(&y_gate) {
                cfg[v] = yv;
            }
            cfg.extend(patch.iter().map(|v| x[v]));
            joint[joint_space.encode(&cfg)] += p * t;
        }
    }
    let joint = DiscreteDistribution::new(vars, dims, joint)?;
    let a: Region = (n..n + patch.len()).collect();
    let far = full.difference(&window);
    if far.is_empty() {
        return Ok(0.0);
    }
    let i = joint.cmi_regions(&a, &window, &far)?;
    Ok((i.max(0.0) / 2.0).sqrt())
}

/// CMI below this is treated as numerical zero by the fit.
pub const CMI_FLOOR: f64 = 1e-13;

/// Exponential fit `cmi ≈ c·e^{−d/ξ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovLengthFit {
    pub samples: Vec<(f64, f64)>,
    /// `−1/slope` of the least-squares line through `(d, ln cmi)`; infinite
    /// for a non-decaying fit.
    pub xi: f64,
    /// Smallest `c` with `cmi ≤ c·e^{−d/ξ}` on every sample.
    pub prefactor: f64,
    /// `e^{intercept}` of the least-squares line.
    pub ls_prefactor: f64,
    /// Root-mean-square residual of `ln cmi` about the line.
    pub residual: f64,
    pub decaying: bool,
}

impl MarkovLengthFit {
    pub fn bound(&self, d: f64) -> f64 {
        self.prefactor * (-d / self.xi).exp()
    }

    /// Every sample obeys `cmi ≤ c·e^{−d/ξ}` (relative slack 1e−12).
    pub fn bound_holds(&self) -> bool {
        self.decaying
            && self
                .samples
                .iter()
                .all(|&(d, v)| v <= self.bound(d) * (1.0 + 1e-12))
    }
}

pub fn fit_markov_length(samples: &[(f64, f64)]) -> Result<MarkovLengthFit> {
    let used: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|&(_, v)| v > CMI_FLOOR)
        .collect();
    let mut ds: Vec<f64> = used.iter().map(|s| s.0).collect();
    ds.sort_by(f64::total_cmp);
    ds.dedup();
    if used.len() < 3 || ds.len() != used.len() {
        return Err(Error::InsufficientSamples(format!(
            "{} samples above {CMI_FLOOR:e} with distinct distances, need at least 3",
            ds.len().min(used.len())
        )));
    }
    let k = used.len() as f64;
    let mx = used.iter().map(|s| s.0).sum::<f64>() / k;
    let my = used.iter().map(|s| s.1.ln()).sum::<f64>() / k;
    let sxx: f64 = used.iter().map(|s| (s.0 - mx).powi(2)).sum();
    let sxy: f64 = used.iter().map(|s| (s.0 - mx) * (s.1.ln() - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (used
        .iter()
        .map(|s| (s.1.ln() - intercept - slope * s.0).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    let decaying = slope < 0.0;
    let xi = if decaying {
        -1.0 / slope
    } else {
        f64::INFINITY
    };
    let prefactor = if decaying {
        used.iter()
            .map(|&(d, v)| v * (d / xi).exp())
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    Ok(MarkovLengthFit {
        samples: used,
        xi,
        prefactor,
        ls_prefactor: intercept.exp(),
        residual,
        decaying,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ising_chain;
    use approx::assert_relative_eq;

    #[test]
    fn exact_exponential_is_recovered() {
        let s: Vec<(f64, f64)> = (1..6)
            .map(|d| (d as f64, 0.3 * (-(d as f64) / 2.0).exp()))
            .collect();
        let f = fit_markov_length(&s).unwrap();
        assert_relative_eq!(f.xi, 2.0, max_relative = 1e-9);
        assert_relative_eq!(f.prefactor, 0.3, max_relative = 1e-9);
        assert_relative_eq!(f.ls_prefactor, 0.3, max_relative = 1e-9);
        assert!(f.residual < 1e-12);
        assert!(f.bound_holds());
    }

    #[test]
    fn constant_cmi_is_flagged() {
        let f = fit_markov_length(&[(1.0, 0.1), (2.0, 0.1), (3.0, 0.1)]).unwrap();
        assert!(!f.decaying);
        assert!(!f.bound_holds());
    }

    #[test]
    fn too_few_samples() {
        assert!(fit_markov_length(&[(1.0, 0.1), (2.0, 1e-20), (3.0, 0.01)]).is_err());
        assert!(fit_markov_length(&[(1.0, 0.1), (1.0, 0.05), (3.0, 0.01)]).is_err());
    }

    #[test]
    fn zero_noise_recovery_is_identity() {
        let m = ising_chain(5, false, 0.6);
        let p = m.exact_distribution(Budget::default()).unwrap();
        let gate = LocalChannel::bit_flip(2, 0.0).unwrap();
        let r = build_patch_recovery(&p, &gate, m.graph(), 1).unwrap();
        for y in 0..2 {
            for w in [[0, y, 0], [1, y, 1], [0, y, 1]] {
                assert_eq!(r.prob(&[y], &w), 1.0);
            }
        }
        let proc = LayeredProcess::bit_flips(&[1, 2, 3].into(), 0.0).unwrap();
        let recs = trotterized_recoveries(&p, &proc, m.graph(), 1, Budget::default()).unwrap();
        assert!(recovery_error(&p, &proc, &recs, Budget::default()).unwrap() < 1e-15);
    }

    #[test]
    fn full_depolarizing_on_product_resamples_marginal() {
        let p = DiscreteDistribution::new(vec![0, 1], vec![2, 2], vec![0.56, 0.14, 0.24, 0.06])
            .unwrap();
        let g = Hypergraph::new(2, 2, vec![vec![0], vec![1]]).unwrap();
        let gate = LocalChannel::depolarizing(vec![0], vec![2], 1.0).unwrap();
        let r = build_patch_recovery(&p, &gate, &g, 1).unwrap();
        for y in 0..2 {
            assert_relative_eq!(r.prob(&[0], &[y]), 0.7, max_relative = 1e-12);
        }
        let noisy = apply_channel(&p, &gate).unwrap();
        let rec = r.apply(&noisy).unwrap();
        assert!(rec.tv_distance(&p).unwrap() < 1e-14);
    }

    #[test]
    fn single_gate_recovery_is_within_cmi_bound_of_global_bayes() {
        let m = ising_chain(8, false, 0.5);
        let p = m.exact_distribution(Budget::default()).unwrap();
        let gate = LocalChannel::bit_flip(3, 0.05).unwrap();
        let noisy = apply_channel(&p, &gate).unwrap();
        // global Bayes: posterior of site 3 given every noisy site
        let mut global = vec![0.0; p.len()];
        for (i, g) in global.iter_mut().enumerate() {
            let z = p.space().decode(i);
            for y in 0..2 {
                let mut zy = z.clone();
                zy[3] = y;
                let mut post = [0.0; 2];
                for (x, pp) in post.iter_mut().enumerate() {
                    let mut zx = z.clone();
                    zx[3] = x;
                    *pp = p.prob(&zx) * gate.prob(y, x);
                }
                *g += noisy.prob(&zy) * post[z[3]] / (post[0] + post[1]);
            }
        }
        assert!(tv(&global, p.probs()) < 1e-14);
        let r = build_patch_recovery(&p, &gate, m.graph(), 2).unwrap();
        assert!(r.stochasticity_error() < 1e-12);
        let local = r.apply(&noisy).unwrap();
        let gap = tv(local.probs(), &global);
        let bound = patch_recovery_bound(&p, &gate, m.graph(), 2).unwrap();
        assert!(gap <= bound, "{gap} > {bound}");
        // on a chain the collar screens the far sites exactly
        assert!(gap < 1e-12);
    }

    #[test]
    fn error_decreases_with_radius_and_beats_no_recovery() {
        let m = ising_chain(8, false, 0.5);
        let p = m.exact_distribution(Budget::default()).unwrap();
        let proc = LayeredProcess::bit_flips(&m.graph().all_vertices(), 0.05).unwrap();
        let noisy = apply_process(&p, &proc, Budget::default()).unwrap();
        let ceiling = tv(p.probs(), noisy.probs());
        assert!(
            (recovery_error(&p, &proc, &[], Budget::default()).unwrap() - ceiling).abs() < 1e-15
        );
        let mut prev = f64::INFINITY;
        for r in 1..=3 {
            let recs = trotterized_recoveries(&p, &proc, m.graph(), r, Budget::default()).unwrap();
            let e = recovery_error(&p, &proc, &recs, Budget::default()).unwrap();
            assert!(
                e < prev && e <= ceiling,
                "r={r}: {e} vs {prev}, ceiling {ceiling}"
            );
            prev = e;
        }
    }
}
