//! Closed-form pinning thresholds, the Kotecký–Preiss certificate, and the
//! decay bound on the cross term `F_AC`.

use super::cluster::{exact_f_ac, ClusterExpansion};
use super::{enumerate_polymers, max_polymer_weight, Polymer};
use crate::error::{Error, Result};
use crate::graph::{Region, Tripartition};
use crate::pinned::PinnedModel;
use crate::space::{Budget, StateSpace};

/// `p_min,c = 𝔡·(1 + ln(1+𝔡) + 𝔡·h_max + ln(q_eff − 1))`.
pub fn critical_pinning(degree: usize, h_max: f64, q_eff: usize) -> f64 {
    assert!(degree >= 1, "degree must be at least 1");
    assert!(q_eff >= 2, "effective dimension must be at least 2");
    let d = degree as f64;
    d * (1.0 + (1.0 + d).ln() + d * h_max + ((q_eff - 1) as f64).ln())
}

/// `δ = p_min/𝔡 − 𝔡·h_max − ln(q_eff − 1)`.
pub fn delta(m: &PinnedModel) -> f64 {
    let d = m.degree().max(1) as f64;
    let q = m.q_eff().max(2);
    m.p_min() / d - d * m.h_max() - ((q - 1) as f64).ln()
}

/// Pinning strength guaranteed by depth-`d` noise of strength ε:
/// `d·ln(1−ε) − ln ε`.
pub fn noise_pinning(eps: f64, depth: usize) -> f64 {
    depth as f64 * (-eps).ln_1p() - eps.ln()
}

fn threshold_rhs(degree: usize, beta: f64, q: usize, depth: usize) -> f64 {
    let d = degree as f64;
    d * (1.0 + (1.0 + d).ln() + d * beta + depth as f64 * (q as f64).ln())
}

/// `noise_pinning(ε, d) − 𝔡(1 + ln(1+𝔡) + 𝔡β + d ln q)`.
pub fn threshold_residual(eps: f64, degree: usize, beta: f64, q: usize, depth: usize) -> f64 {
    noise_pinning(eps, depth) - threshold_rhs(degree, beta, q, depth)
}

/// The unique ε in (0, 1) with `d·ln(1−ε) − ln ε = 𝔡(1 + ln(1+𝔡) + 𝔡β + d ln q)`.
///
/// The left side is strictly decreasing in ε, so bisection in `ln ε` brackets
/// the root down to adjacent floating-point values.
pub fn critical_epsilon(degree: usize, beta: f64, q: usize, depth: usize) -> f64 {
    assert!(
        degree >= 1 && q >= 2 && depth >= 1,
        "arguments must be positive"
    );
    assert!(beta >= 0.0, "beta must be nonnegative");
    let rhs = threshold_rhs(degree, beta, q, depth);
    let f = |u: f64| depth as f64 * (-u.exp()).ln_1p() - u - rhs;
    let mut lo = -rhs - 1.0;
    while f(lo) <= 0.0 {
        lo *= 2.0;
    }
    let mut hi = -1e-300f64.max(f64::MIN_POSITIVE);
    while f(hi) >= 0.0 {
        hi /= 2.0;
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (el, eh) = (lo.exp(), hi.exp());
    if f(lo).abs() <= f(hi).abs() {
        el
    } else {
        eh
    }
}

/// Result of checking
/// `Σ_{γ'≁γ} max|Z_{γ'}| e^{(a+b)|γ'|} ≤ a|γ|` for every polymer up to `k_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct KpCertificate {
    pub a: f64,
    pub b: f64,
    pub k_max: usize,
    pub satisfied: bool,
    /// `min_γ (a|γ| − LHS(γ))`; negative when violated.
    pub margin: f64,
    pub tightest: Option<Polymer>,
}

pub fn kp_certificate(m: &PinnedModel, a: f64, b: f64, k_max: usize) -> Result<KpCertificate> {
    if a.is_nan() || b.is_nan() || a <= 0.0 || b < 0.0 {
        return Err(Error::Precondition(
            "Kotecký–Preiss needs a > 0 and b ≥ 0".into(),
        ));
    }
    let g = m.graph();
    let polys = enumerate_polymers(g, m.b(), k_max.max(1));
    let weights: Vec<f64> = polys
        .iter()
        .map(|p| {
            let z = max_polymer_weight(m, p.sites())?;
            Ok(if z == 0.0 {
                0.0
            } else {
                z * ((a + b) * p.size() as f64).exp()
            })
        })
        .collect::<Result<_>>()?;
    let mut margin = f64::INFINITY;
    let mut tightest = None;
    for gamma in &polys {
        let lhs: f64 = polys
            .iter()
            .zip(&weights)
            .filter(|(q, _)| gamma.incompatible(q, g))
            .map(|(_, w)| w)
            .sum();
        let slack = a * gamma.size() as f64 - lhs;
        if slack < margin {
            margin = slack;
            tightest = Some(gamma.clone());
        }
    }
    if polys.is_empty() {
        margin = 0.0;
    }
    Ok(KpCertificate {
        a,
        b,
        k_max,
        satisfied: margin >= 0.0,
        margin,
        tightest,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FacRow {
    /// Full configuration; entries on B are the favored states.
    pub x: Vec<usize>,
    pub exact: f64,
    pub truncated: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FacReport {
    pub p_min: f64,
    pub p_min_c: f64,
    /// `b = p_min − p_min,c`.
    pub rate: f64,
    /// `None` when A and C are disconnected.
    pub d_ac: Option<usize>,
    pub boundary_a: usize,
    pub boundary_c: usize,
    /// `min(|∂A|, |∂C|)·e^{−b·d_AC}`.
    pub bound: f64,
    pub w_max: usize,
    /// `min(|∂A|, |∂C|)·e^{−b(w_max+1)}`, the KP tail beyond the truncation.
    pub tail: f64,
    pub min_f_ac_weight: Option<usize>,
    pub rows: Vec<FacRow>,
}

impl FacReport {
    pub fn max_exact(&self) -> f64 {
        self.rows.iter().map(|r| r.exact.abs()).fold(0.0, f64::max)
    }

    pub fn max_truncated(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.truncated.abs())
            .fold(0.0, f64::max)
    }

    /// Exact `|F_AC|` within the bound for every `x_AC`.
    pub fn holds(&self) -> bool {
        self.max_exact() <= self.bound
    }
}

/// Compares `|F_AC(x_AC)|` against `min(|∂A|,|∂C|)·e^{−(p_min−p_min,c) d_AC}`
/// for every assignment of A∪C.
pub fn f_ac_bound_check(
    m: &PinnedModel,
    tri: &Tripartition,
    w_max: usize,
    budget: Budget,
) -> Result<FacReport> {
    let g = m.graph();
    let p_min_c = critical_pinning(m.degree().max(1), m.h_max(), m.q_eff().max(2));
    if m.p_min() <= p_min_c {
        return Err(Error::Precondition(format!(
            "p_min = {} does not exceed p_min,c = {p_min_c}",
            m.p_min()
        )));
    }
    let rate = m.p_min() - p_min_c;
    let d_ac = if tri.a.is_empty() || tri.c.is_empty() {
        None
    } else {
        g.distance(&tri.a, &tri.c)?
    };
    let boundary_a = g.boundary(&tri.a).len();
    let boundary_c = g.boundary(&tri.c).len();
    let pre = boundary_a.min(boundary_c) as f64;
    let bound = d_ac.map_or(0.0, |d| pre * (-rate * d as f64).exp());
    let tail = pre * (-rate * (w_max + 1) as f64).exp();
    let expansion = ClusterExpansion::new(m, tri, w_max)?;

    let ac: Region = tri.ac();
    let dims: Vec<usize> = ac.iter().map(|v| g.dim(v)).collect();
    budget.check(&dims)?;
    let space = StateSpace::new(dims);
    let mut rows = Vec::with_capacity(space.size());
    let mut min_w: Option<usize> = None;
    for cfg in space.configs() {
        let mut x = m.favored().to_vec();
        for (v, s) in ac.iter().zip(cfg) {
            x[v] = s;
        }
        let r = expansion.evaluate(m, &x, budget)?;
        if let Some(w) = r.min_f_ac_weight {
            min_w = Some(min_w.map_or(w, |c| c.min(w)));
        }
        rows.push(FacRow {
            exact: exact_f_ac(m, tri, &x, budget)?,
            truncated: r.f_ac,
            x,
        });
    }
    Ok(FacReport {
        p_min: m.p_min(),
        p_min_c,
        rate,
        d_ac,
        boundary_a,
        boundary_c,
        bound,
        w_max,
        tail,
        min_f_ac_weight: min_w,
        rows,
    })
}
