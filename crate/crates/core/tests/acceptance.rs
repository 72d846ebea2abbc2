//! Acceptance suite: one line per criterion, with the measured numbers.
//!
//! Run with `cargo test -p markovlen-core --test acceptance`. The report
//! always prints every line; pass `-- --strict` to exit nonzero when any
//! criterion fails.

use std::error::Error as StdError;
use std::process::ExitCode;
use std::time::Instant;

use markovlen::distribution::tv;
use markovlen::graph::{annulus_tripartition, Hypergraph, Region, Tripartition};
use markovlen::models::{ising_chain, ising_grid};
use markovlen::noise::{
    apply_process, block_spins, pin_single_site, spacetime_model, LayeredProcess, LocalChannel,
};
use markovlen::pinned::PinnedModel;
use markovlen::polymer::{
    critical_epsilon, critical_pinning, f_ac_bound_check, kp_certificate, threshold_residual,
    z_factorization_check, zd_exponential_bound_check, ClusterExpansion,
};
use markovlen::recovery::{fit_markov_length, recovery_error, trotterized_recoveries};
use markovlen::space::{Budget, StateSpace};
use markovlen::stabilizer::dense::{
    projector, quantum_cmi, trace_norm, CMatrix, DensityMatrix, QuantumChannel,
};
use markovlen::stabilizer::mixing::{noisy_label_distribution, reconstruct_state};
use markovlen::stabilizer::models::cluster_chain;
use markovlen::stabilizer::pauli::phase_value;
use markovlen::stabilizer::{
    cmi_equality_check, induced_classical_channel, stabilizer_distribution, StabilizerHamiltonian,
};
use num_complex::Complex64;

type Res<T> = Result<T, Box<dyn StdError>>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Res<Outcome> {
    Ok(Outcome { pass, detail })
}

/// Brute-force open Ising chain: `P(x) ∝ exp(β Σ_i s_i s_{i+1})` with
/// `s = 1 − 2x`, indexed with site 0 most significant.
fn chain_oracle(n: usize, beta: f64) -> Vec<f64> {
    let mut w: Vec<f64> = (0..1usize << n)
        .map(|idx| {
            let bit = |i: usize| (idx >> (n - 1 - i)) & 1;
            let aligned: f64 = (0..n - 1)
                .map(|i| if bit(i) == bit(i + 1) { 1.0 } else { -1.0 })
                .sum();
            (beta * aligned).exp()
        })
        .collect();
    let z: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= z);
    w
}

/// Every annulus around a single vertex or a hyperedge, for each radius
/// that leaves C nonempty.
fn annuli(g: &Hypergraph) -> Res<Vec<Tripartition>> {
    let mut centers: Vec<Region> = (0..g.n()).map(|v| Region::new([v])).collect();
    centers.extend(g.edges().iter().map(|e| Region::new(e.iter().copied())));
    centers.dedup();
    let mut out = Vec::new();
    for center in &centers {
        for r in 1.. {
            let t = annulus_tripartition(g, center, r)?;
            if t.c.is_empty() {
                break;
            }
            out.push(t);
        }
    }
    Ok(out)
}

fn criterion_1() -> Res<Outcome> {
    let budget = Budget::default();
    let classical = [
        ("chain10 b=0.3", ising_chain(10, false, 0.3)),
        ("chain10 b=1.0", ising_chain(10, false, 1.0)),
        ("grid3x4 b=0.5", ising_grid(3, 4, false, 0.5)),
    ];
    let mut worst = 0.0f64;
    let mut count = 0;
    for (_, m) in &classical {
        let p = m.exact_distribution(budget)?;
        for t in annuli(m.graph())? {
            worst = worst.max(p.cmi(&t)?.abs());
            count += 1;
        }
    }
    let h = cluster_chain(8, 1.0)?;
    let rho = DensityMatrix::gibbs(&h, 0.8)?;
    let mut worst_q = 0.0f64;
    let mut count_q = 0;
    for t in annuli(h.graph())? {
        worst_q = worst_q.max(quantum_cmi(&rho, &t)?.abs());
        count_q += 1;
    }
    outcome(
        worst <= 1e-10 && worst_q <= 1e-8,
        format!(
            "max classical CMI {worst:.2e} over {count} annuli (tol 1e-10); \
             max quantum CMI {worst_q:.2e} over {count_q} annuli of the 8-qubit cluster chain (tol 1e-8)"
        ),
    )
}

fn criterion_2() -> Res<Outcome> {
    let n = 6;
    let beta = 0.7;
    let m = ising_chain(n, false, beta);
    let prior = chain_oracle(n, beta);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for eps in [0.05, 0.2] {
        for b in [(0..n).collect::<Vec<_>>(), vec![1, 2, 3, 4]] {
            let chans: Vec<LocalChannel> = b
                .iter()
                .map(|&v| LocalChannel::bit_flip(v, eps))
                .collect::<Result<_, _>>()?;
            let obs_space = StateSpace::new(vec![2; b.len()]);
            for obs in obs_space.configs() {
                let pinned =
                    pin_single_site(&m, &chans, &obs)?.exact_distribution(Budget::default())?;
                let mut post: Vec<f64> = (0..1usize << n)
                    .map(|idx| {
                        let like: f64 = b
                            .iter()
                            .zip(&obs)
                            .map(|(&v, &o)| {
                                if (idx >> (n - 1 - v)) & 1 == o {
                                    1.0 - eps
                                } else {
                                    eps
                                }
                            })
                            .product();
                        prior[idx] * like
                    })
                    .collect();
                let z: f64 = post.iter().sum();
                post.iter_mut().for_each(|v| *v /= z);
                worst = worst.max(tv(pinned.probs(), &post));
                cases += 1;
            }
        }
    }
    outcome(
        worst <= 1e-10,
        format!("max TV {worst:.2e} over {cases} post-selections (tol 1e-10)"),
    )
}

fn criterion_3() -> Res<Outcome> {
    let n = 4;
    let beta = 0.6;
    let eps = 0.1;
    let m = ising_chain(n, false, beta);
    let prior = chain_oracle(n, beta);
    let ch = LocalChannel::replacement(vec![1, 2], vec![2, 2], eps)?;
    let proc = LayeredProcess::new(vec![vec![ch.clone()], vec![ch]])?;
    let b = Region::new([1, 2]);
    let t = |out: usize, input: usize| if out == input { 1.0 - eps } else { eps / 3.0 };
    let mut worst_post = 0.0f64;
    let mut worst_block = 0.0f64;
    let mut gaps_ok = true;
    let mut min_gap = f64::INFINITY;
    let mut rows = 0;
    for fin in StateSpace::new(vec![2, 2]).configs() {
        let st = spacetime_model(&m, &proc, &b, &fin)?;
        let post = st.posterior(Budget::default())?;
        let vars = post.variables().to_vec();
        let mut oracle = vec![0.0; post.len()];
        let mut cfg = vec![0; vars.len()];
        for (k, slot) in oracle.iter_mut().enumerate() {
            post.space().decode_into(k, &mut cfg);
            let value = |site: usize, time: usize| {
                if time == 2 && b.contains(site) {
                    return fin[b.position(site).unwrap()];
                }
                let var = st.var(site, time).unwrap();
                cfg[vars.iter().position(|&v| v == var).unwrap()]
            };
            if (0..n)
                .filter(|&i| !b.contains(i))
                .any(|i| value(i, 0) != value(i, 1) || value(i, 1) != value(i, 2))
            {
                continue;
            }
            let x0: usize = (0..n).map(|i| value(i, 0) << (n - 1 - i)).sum();
            let pair = |time: usize| 2 * value(1, time) + value(2, time);
            *slot = prior[x0] * t(pair(1), pair(0)) * t(pair(2), pair(1));
        }
        let z: f64 = oracle.iter().sum();
        oracle.iter_mut().for_each(|v| *v /= z);
        worst_post = worst_post.max(tv(post.probs(), &oracle));

        let blocked = block_spins(&st)?;
        let unblocked = blocked.spacetime_distribution(Budget::default())?;
        worst_block = worst_block.max(unblocked.tv_distance(&post)?);
        let report = blocked.gap_report();
        gaps_ok &= report.holds();
        min_gap = min_gap.min(report.min_gap());
        rows += report.rows.len();
    }
    outcome(
        worst_post <= 1e-10 && worst_block <= 1e-10 && gaps_ok,
        format!(
            "posterior TV {worst_post:.2e}, blocked TV {worst_block:.2e} (tol 1e-10); \
             pinning bounds hold on {rows} fully-in-B hyperedges: {gaps_ok}, min gap {min_gap:.6}"
        ),
    )
}

fn pinned_flips(
    m: &markovlen::GibbsModel,
    b: &[usize],
    eps: f64,
    obs: &[usize],
) -> Res<PinnedModel> {
    let chans: Vec<LocalChannel> = b
        .iter()
        .map(|&v| LocalChannel::bit_flip(v, eps))
        .collect::<Result<_, _>>()?;
    Ok(pin_single_site(m, &chans, obs)?)
}

fn criterion_4() -> Res<Outcome> {
    let chain_b: Vec<usize> = (1..9).collect();
    let instances = vec![
        pinned_flips(&ising_chain(10, false, 0.3), &chain_b, 0.05, &[0; 8])?,
        pinned_flips(
            &ising_chain(10, false, 0.3),
            &chain_b,
            0.2,
            &[0, 1, 0, 0, 1, 1, 0, 1],
        )?,
        pinned_flips(
            &ising_grid(3, 3, false, 0.2),
            &[1, 3, 4, 5, 7],
            0.1,
            &[0, 1, 0, 0, 1],
        )?,
    ];
    let mut worst_ratio = 0.0f64;
    let mut worst_fact = 0.0f64;
    let mut subsets = 0;
    let mut splits = 0;
    for m in &instances {
        let r = zd_exponential_bound_check(m)?;
        worst_ratio = worst_ratio.max(r.worst_ratio);
        subsets += r.subsets;
        let b = m.b().sites().to_vec();
        let g = m.graph();
        for mask in 1usize..(1 << b.len()) {
            let low = mask & mask.wrapping_neg();
            // sub ranges over subsets of mask containing its lowest bit
            let rest = mask ^ low;
            let mut sub = rest;
            loop {
                let d1_mask = sub | low;
                let d2_mask = mask ^ d1_mask;
                if d2_mask != 0 {
                    let pick = |mk: usize| -> Region {
                        (0..b.len())
                            .filter(|k| mk >> k & 1 == 1)
                            .map(|k| b[k])
                            .collect()
                    };
                    let (d1, d2) = (pick(d1_mask), pick(d2_mask));
                    if !g.touches(&d1, &d2) {
                        worst_fact = worst_fact.max(z_factorization_check(m, &d1, &d2)?);
                        splits += 1;
                    }
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
        }
    }
    outcome(
        worst_ratio <= 1.0 + 1e-12 && worst_fact <= 1e-12,
        format!(
            "max |Z_D|·e^(δ|D|) = {worst_ratio:.6} over {subsets} subsets (must be ≤ 1); \
             max factorization error {worst_fact:.2e} over {splits} disconnected splits (tol 1e-12)"
        ),
    )
}

fn chain_instance(n: usize, beta: f64, eps: f64) -> Res<(PinnedModel, Tripartition)> {
    let m = ising_chain(n, false, beta);
    let b: Vec<usize> = (1..n - 1).collect();
    let p = pinned_flips(&m, &b, eps, &vec![0; b.len()])?;
    let t = Tripartition::new(m.graph(), [0].into(), Region::new(b), [n - 1].into())?;
    Ok((p, t))
}

fn criterion_5() -> Res<Outcome> {
    let (p, t) = chain_instance(6, 0.2, 0.001)?;
    let w_max = t.b.len();
    let exp = ClusterExpansion::new(&p, &t, w_max)?;
    let mut monotone = true;
    let mut final_res = 0.0f64;
    for xa in 0..2 {
        for xc in 0..2 {
            let x = [xa, 0, 0, 0, 0, xc];
            let r = exp.evaluate(&p, &x, Budget::default())?;
            let res = r.residuals();
            monotone &= res.windows(2).all(|w| w[1] <= w[0]);
            final_res = final_res.max(r.residual());
        }
    }
    let p_min_c = critical_pinning(p.degree().max(1), p.h_max(), p.q_eff().max(2));
    let b = p.p_min() - p_min_c;
    let kp = if b >= 0.0 {
        Some(kp_certificate(&p, 1.0, b, w_max)?)
    } else {
        None
    };
    let kp_ok = kp.as_ref().is_some_and(|c| c.satisfied);
    outcome(
        monotone && final_res < 1e-8 && kp_ok,
        format!(
            "residual monotone in w_max: {monotone}; final residual {final_res:.2e} at w_max={w_max} (tol 1e-8); \
             KP a=1 b={b:.4}: {}",
            kp.map_or("b < 0".to_string(), |c| format!("margin {:.4}", c.margin))
        ),
    )
}

fn criterion_6() -> Res<Outcome> {
    let grid = ising_grid(3, 3, false, 0.05);
    let grid_b: Vec<usize> = (1..8).collect();
    let grid_p = pinned_flips(&grid, &grid_b, 1e-7, &[0; 7])?;
    let grid_t = Tripartition::new(grid.graph(), [0].into(), Region::new(grid_b), [8].into())?;
    let instances = vec![
        chain_instance(6, 0.2, 0.001)?,
        chain_instance(7, 0.1, 0.001)?,
        (grid_p, grid_t),
    ];
    let mut bound_ok = true;
    let mut literal_zero = true;
    let mut corrected_zero = true;
    let mut parts = Vec::new();
    for (p, t) in &instances {
        let r = f_ac_bound_check(p, t, t.b.len(), Budget::default())?;
        let d = r.d_ac.expect("A and C are connected");
        let w = r.min_f_ac_weight.unwrap_or(usize::MAX);
        bound_ok &= r.holds();
        literal_zero &= w >= d;
        corrected_zero &= w + 1 >= d;
        parts.push(format!(
            "|F|={:.2e}≤{:.2e} d_AC={d} first nonzero weight {w}",
            r.max_exact(),
            r.bound
        ));
    }
    outcome(
        bound_ok && literal_zero,
        format!(
            "bound holds: {bound_ok}; truncated F_AC zero below d_AC: {literal_zero}; \
             zero below d_AC-1: {corrected_zero}; [{}]",
            parts.join("; ")
        ),
    )
}

fn criterion_7() -> Res<Outcome> {
    let n = 12;
    let eps = 0.05;
    let m = ising_chain(n, false, 0.5);
    let g = m.graph();
    let clean = m.exact_distribution(Budget::default())?;
    let noisy = apply_process(
        &clean,
        &LayeredProcess::bit_flips(&g.all_vertices(), eps)?,
        Budget::default(),
    )?;
    let center = Region::new([5]);
    let mut samples = Vec::new();
    for r in 1..=4 {
        let t = annulus_tripartition(g, &center, r)?;
        let d = g.distance(&t.a, &t.c)?.expect("connected chain") as f64;
        samples.push((d, noisy.cmi(&t)?));
    }
    let fit = fit_markov_length(&samples)?;
    let eps_c = critical_epsilon(g.max_degree(), 0.5, 2, 1);
    let cmis: Vec<String> = samples
        .iter()
        .map(|(d, v)| format!("{d}:{v:.3e}"))
        .collect();
    outcome(
        fit.xi.is_finite() && fit.bound_holds(),
        format!(
            "ξ={:.4} c={:.4e} fit residual {:.3e}; samples [{}]; bound holds: {}; ε_c={eps_c:.3e} (ε={eps} is not below it)",
            fit.xi,
            fit.prefactor,
            fit.residual,
            cmis.join(", "),
            fit.bound_holds()
        ),
    )
}

/// `Tr[A B]` in O(d²).
fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let d = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// `Tr[Π_s ρ]` for every label, applying one generator projector at a time
/// through the monomial action of `G_b^k`.
fn dense_label_traces(h: &StabilizerHamiltonian, rho: &CMatrix, out: &mut Vec<(Vec<usize>, f64)>) {
    fn walk(
        h: &StabilizerHamiltonian,
        m: &CMatrix,
        prefix: &mut Vec<usize>,
        out: &mut Vec<(Vec<usize>, f64)>,
    ) {
        let b = prefix.len();
        if b == h.n_generators() {
            out.push((prefix.clone(), m.trace().re));
            return;
        }
        let q = h.q();
        let powers: Vec<_> = (0..q)
            .map(|k| h.generators()[b].pow(k).monomial().left_mul(m))
            .collect();
        for s in 0..q {
            let mut next = CMatrix::zeros(m.nrows(), m.ncols());
            for (k, gm) in powers.iter().enumerate() {
                next += gm * (phase_value(2 * ((q - k * s % q) % q), q) / q as f64);
            }
            prefix.push(s);
            walk(h, &next, prefix, out);
            prefix.pop();
        }
    }
    walk(h, rho, &mut Vec::new(), out);
}

fn criterion_8() -> Res<Outcome> {
    let budget = Budget::default();
    let beta = 0.8;
    let h = cluster_chain(8, 1.0)?;
    let channels: Vec<QuantumChannel> = (0..8)
        .map(|i| QuantumChannel::depolarizing(i, 2, 0.1))
        .collect::<Result<_, _>>()?;

    let rho = DensityMatrix::gibbs(&h, beta)?;
    let p = stabilizer_distribution(&h, beta)?.exact_distribution(budget)?;
    let mut err_a = trace_norm(&(reconstruct_state(&h, &p)? - rho.matrix()));
    let mut noisy = rho.clone();
    for ch in &channels {
        noisy = noisy.apply(ch)?;
    }
    let p_noisy = noisy_label_distribution(&h, beta, &channels, budget)?;
    err_a = err_a.max(trace_norm(
        &(reconstruct_state(&h, &p_noisy)? - noisy.matrix()),
    ));

    let mut traces = Vec::new();
    dense_label_traces(&h, rho.matrix(), &mut traces);
    let err_b = traces
        .iter()
        .map(|(s, v)| (p.prob(s) - v).abs())
        .fold(0.0, f64::max);

    let mut err_c = 0.0f64;
    for ch in &channels {
        let t = induced_classical_channel(ch, &h)?;
        let labels = t.support().to_vec();
        let local = StateSpace::new(vec![2; labels.len()]);
        let embed = |cfg: &[usize]| {
            let mut s = vec![0; h.n_generators()];
            for (&b, &v) in labels.iter().zip(cfg) {
                s[b] = v;
            }
            s
        };
        for input in 0..local.size() {
            let image = ch.apply_operator(h.n(), &projector(&h, &embed(&local.decode(input)))?);
            for out in 0..local.size() {
                let target = projector(&h, &embed(&local.decode(out)))?;
                let formula = trace_product(&image, &target).re / h.rank();
                err_c = err_c.max((formula - t.prob(out, input)).abs());
            }
        }
    }

    let tri = Tripartition::new(h.graph(), [0, 1].into(), [2, 3, 4, 5].into(), [6, 7].into())?;
    let eq = cmi_equality_check(&h, beta, &channels, &tri, budget)?;
    let err_d = eq.difference();
    outcome(
        err_a <= 1e-10 && err_b <= 1e-10 && err_c <= 1e-10 && err_d <= 1e-8,
        format!(
            "(a) reconstruction {err_a:.2e} (b) label traces {err_b:.2e} (c) induced channel {err_c:.2e} \
             (tol 1e-10); (d) |I_q - I_cl| = {err_d:.2e} with I_q = {:.6e} (tol 1e-8)",
            eq.quantum
        ),
    )
}

fn criterion_9() -> Res<Outcome> {
    let budget = Budget::default();
    let m = ising_chain(8, false, 0.5);
    let g = m.graph();
    let clean = m.exact_distribution(budget)?;
    let proc = LayeredProcess::bit_flips(&g.all_vertices(), 0.05)?;
    let noisy = apply_process(&clean, &proc, budget)?;
    let tv_none = clean.tv_distance(&noisy)?;
    let mut errors = Vec::new();
    for r in 1..=3 {
        let recs = trotterized_recoveries(&clean, &proc, g, r, budget)?;
        errors.push(recovery_error(&clean, &proc, &recs, budget)?);
    }
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    let below = errors.iter().all(|&e| e <= tv_none);
    let shown: Vec<String> = errors
        .iter()
        .enumerate()
        .map(|(i, e)| format!("r={}:{e:.4e}", i + 1))
        .collect();
    outcome(
        decreasing && below,
        format!(
            "errors [{}]; strictly decreasing: {decreasing}; all ≤ no-recovery TV {tv_none:.4e}: {below}",
            shown.join(", ")
        ),
    )
}

fn criterion_10() -> Res<Outcome> {
    let betas = [0.0, 0.5, 1.0, 1.5, 2.0];
    // (degree, depth, q); the last three each raise one parameter of the first
    let combos = [(1, 1, 2), (2, 1, 2), (1, 2, 2), (1, 1, 3)];
    let mut rows = Vec::new();
    for &(degree, depth, q) in &combos {
        for &beta in &betas {
            let e = critical_epsilon(degree, beta, q, depth);
            rows.push((
                degree,
                depth,
                q,
                beta,
                e,
                threshold_residual(e, degree, beta, q, depth),
            ));
        }
    }
    let worst = rows.iter().map(|r| r.5.abs()).fold(0.0, f64::max);
    let at = |c: usize, b: usize| rows[c * betas.len() + b].4;
    let in_beta = (0..combos.len()).all(|c| (1..betas.len()).all(|b| at(c, b) < at(c, b - 1)));
    let in_others = (0..betas.len()).all(|b| (1..combos.len()).all(|c| at(c, b) < at(0, b)));
    outcome(
        rows.len() == 20 && worst < 1e-10 && in_beta && in_others,
        format!(
            "{} rows; max residual {worst:.2e} (tol 1e-10); decreasing in β: {in_beta}; in 𝔡, d, q: {in_others}",
            rows.len()
        ),
    )
}

fn main() -> ExitCode {
    type Criterion = (usize, &'static str, f64, fn() -> Res<Outcome>);
    let criteria: [Criterion; 10] = [
        (1, "Hammersley-Clifford exactness", 60.0, criterion_1),
        (2, "pinning identity", 60.0, criterion_2),
        (3, "spacetime and blocking identity", 60.0, criterion_3),
        (4, "Z_D bound and factorization", 120.0, criterion_4),
        (5, "cluster-expansion convergence", 120.0, criterion_5),
        (6, "F_AC bound", 120.0, criterion_6),
        (7, "CMI decay fit", 300.0, criterion_7),
        (8, "quantum reduction", 180.0, criterion_8),
        (9, "local recovery", 120.0, criterion_9),
        (10, "threshold sweep", 1.0, criterion_10),
    ];
    let mut passed = 0;
    for (id, name, limit, run) in criteria {
        let start = Instant::now();
        let result = run();
        let secs = start.elapsed().as_secs_f64();
        let (ok, detail) = match result {
            Ok(o) => (o.pass && secs < limit, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        passed += ok as usize;
        let tag = if ok { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} [{tag}] {name}: {detail} ({secs:.2}s, limit {limit}s)");
    }
    println!("acceptance: {passed}/10 criteria passed");
    let strict = std::env::args().any(|a| a == "--strict");
    if passed == 10 || !strict {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
