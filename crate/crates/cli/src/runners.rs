//! One function per subcommand. Each validates the whole configuration and
//! the enumeration budget before computing anything.

use markovlen::noise::{apply_process, pin_single_site, LayeredProcess, LocalChannel};
use markovlen::polymer::{
    critical_epsilon, critical_pinning, kp_certificate, threshold_residual, ClusterExpansion,
};
use markovlen::recovery::{fit_markov_length, recovery_error, trotterized_recoveries};
use markovlen::stabilizer::dense::{trace_norm, DENSE_MAX_DIM};
use markovlen::stabilizer::mixing::{
    label_probabilities, label_regions, noisy_label_distribution, reconstruct_state,
    stabilizer_mixing_report,
};
use markovlen::stabilizer::pauli::is_prime;
use markovlen::stabilizer::{
    stabilizer_distribution, DensityMatrix, QuantumChannel, StabilizerHamiltonian,
};
use markovlen::{annulus_tripartition, Budget, GibbsModel, Hypergraph, Region, Tripartition};

use crate::config::{ChannelKind, ExperimentConfig, Layout, NoiseSpec, TripartitionSpec};
use crate::error::CliError;
use crate::model::Model;
use crate::output::{fmt_f64, Table};

/// Tolerance for exact identities in `stabilizer-check`.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Tolerance for the quantum/classical CMI comparison.
pub const CMI_TOL: f64 = 1e-8;

/// A tripartition together with the annulus radius that produced it
/// (`None` for an explicit A/C pair).
#[derive(Debug, Clone)]
pub struct Member {
    pub radius: Option<usize>,
    pub tri: Tripartition,
}

pub fn tripartition_family(
    spec: Option<&TripartitionSpec>,
    g: &Hypergraph,
) -> Result<Vec<Member>, CliError> {
    let spec = spec.ok_or_else(|| CliError::Config("missing [tripartition] section".into()))?;
    match (&spec.center, &spec.a, &spec.c) {
        (Some(center), None, None) => {
            let center = Region::new(center.iter().copied());
            g.check_region(&center)
                .map_err(|e| CliError::Config(format!("tripartition center: {e}")))?;
            if spec.radius_min < 1 {
                return Err(CliError::Config("radius_min must be at least 1".into()));
            }
            let max = match spec.radius_max {
                Some(r) => r,
                None => {
                    let mut r = spec.radius_min;
                    while !annulus_tripartition(g, &center, r + 1)?.c.is_empty() {
                        r += 1;
                    }
                    r
                }
            };
            if max < spec.radius_min {
                return Err(CliError::Config("radius_max is below radius_min".into()));
            }
            (spec.radius_min..=max)
                .map(|r| {
                    let tri = annulus_tripartition(g, &center, r)?;
                    if tri.c.is_empty() {
                        return Err(CliError::Config(format!(
                            "radius {r} leaves region C empty"
                        )));
                    }
                    Ok(Member {
                        radius: Some(r),
                        tri,
                    })
                })
                .collect()
        }
        (None, Some(a), Some(c)) => {
            let a = Region::new(a.iter().copied());
            let c = Region::new(c.iter().copied());
            let b = g.all_vertices().difference(&a).difference(&c);
            let tri = Tripartition::new(g, a, b, c)
                .map_err(|e| CliError::Config(format!("tripartition: {e}")))?;
            Ok(vec![Member { radius: None, tri }])
        }
        _ => Err(CliError::Config(
            "[tripartition] needs either `center` or both `a` and `c`".into(),
        )),
    }
}

fn check_budget(budget: Budget, dims: &[usize], what: &str) -> Result<(), CliError> {
    budget
        .check(dims)
        .map_err(|e| CliError::Budget(format!("{what}: {e}")))
}

fn check_dense(h: &StabilizerHamiltonian) -> Result<(), CliError> {
    let fits = (h.n() as u32) < usize::BITS
        && h.q()
            .checked_pow(h.n() as u32)
            .is_some_and(|d| d <= DENSE_MAX_DIM);
    if fits {
        Ok(())
    } else {
        Err(CliError::Budget(format!(
            "{} qudits of dimension {} exceed the dense limit of {DENSE_MAX_DIM} amplitudes",
            h.n(),
            h.q()
        )))
    }
}

fn epsilons(noise: &NoiseSpec) -> Result<Vec<f64>, CliError> {
    let eps = noise.epsilon.to_vec();
    if eps.is_empty() {
        return Err(CliError::Config("noise.epsilon is empty".into()));
    }
    if let Some(e) = eps.iter().find(|e| !(0.0..=1.0).contains(*e)) {
        return Err(CliError::Config(format!(
            "noise epsilon {e} is outside [0, 1]"
        )));
    }
    if noise.depth < 1 {
        return Err(CliError::Config("noise.depth must be at least 1".into()));
    }
    Ok(eps)
}

fn noise_sites(noise: &NoiseSpec, g: &Hypergraph) -> Result<Vec<usize>, CliError> {
    match &noise.sites {
        None => Ok((0..g.n()).collect()),
        Some(s) => {
            let r = Region::new(s.iter().copied());
            if r.len() != s.len() {
                return Err(CliError::Config("noise.sites has duplicates".into()));
            }
            g.check_region(&r)
                .map_err(|e| CliError::Config(format!("noise.sites: {e}")))?;
            Ok(r.sites().to_vec())
        }
    }
}

fn classical_channel(
    kind: ChannelKind,
    sites: Vec<usize>,
    dims: Vec<usize>,
    eps: f64,
) -> Result<LocalChannel, CliError> {
    Ok(match kind {
        ChannelKind::BitFlip if dims.iter().all(|&d| d == 2) && sites.len() == 1 => {
            LocalChannel::bit_flip(sites[0], eps)?
        }
        ChannelKind::BitFlip | ChannelKind::Replacement => {
            LocalChannel::replacement(sites, dims, eps)?
        }
        ChannelKind::Depolarizing => LocalChannel::depolarizing(sites, dims, eps)?,
        ChannelKind::Identity => LocalChannel::identity(sites, dims)?,
        ChannelKind::Dephasing | ChannelKind::AmplitudeDamping => {
            return Err(CliError::Config(format!(
                "channel {kind:?} applies to Pauli models only"
            )))
        }
    })
}

/// Layered classical process: one channel per site per layer, or two-site
/// channels on consecutive noise sites in alternating brickwork layers.
pub fn classical_process(
    noise: &NoiseSpec,
    g: &Hypergraph,
    eps: f64,
) -> Result<LayeredProcess, CliError> {
    let sites = noise_sites(noise, g)?;
    let mut layers = Vec::with_capacity(noise.depth);
    for t in 0..noise.depth {
        let mut layer = Vec::new();
        match noise.layout {
            Layout::SingleSite => {
                for &v in &sites {
                    layer.push(classical_channel(
                        noise.channel,
                        vec![v],
                        vec![g.dim(v)],
                        eps,
                    )?);
                }
            }
            Layout::Brickwork => {
                for pair in sites.get(t % 2..).unwrap_or(&[]).chunks(2) {
                    let dims = pair.iter().map(|&v| g.dim(v)).collect();
                    layer.push(classical_channel(noise.channel, pair.to_vec(), dims, eps)?);
                }
            }
        }
        layers.push(layer);
    }
    Ok(LayeredProcess::new(layers)?)
}

pub fn quantum_channels(
    noise: &NoiseSpec,
    h: &StabilizerHamiltonian,
    eps: f64,
) -> Result<Vec<QuantumChannel>, CliError> {
    if noise.layout != Layout::SingleSite {
        return Err(CliError::Config(
            "Pauli models support only the single_site noise layout".into(),
        ));
    }
    let sites = noise_sites(noise, h.graph())?;
    let q = h.q();
    let mut out = Vec::new();
    for _ in 0..noise.depth {
        for &v in &sites {
            out.push(match noise.channel {
                ChannelKind::Depolarizing => QuantumChannel::depolarizing(v, q, eps)?,
                ChannelKind::Dephasing => QuantumChannel::dephasing(v, q, eps)?,
                ChannelKind::BitFlip => QuantumChannel::bit_flip(v, q, eps)?,
                ChannelKind::Identity => QuantumChannel::identity(vec![v], q)?,
                ChannelKind::AmplitudeDamping if q == 2 => {
                    QuantumChannel::amplitude_damping(v, eps)?
                }
                other => {
                    return Err(CliError::Config(format!(
                        "channel {other:?} is not available for q = {q}"
                    )))
                }
            });
        }
    }
    Ok(out)
}

fn classical(model: &Model, what: &str) -> Result<GibbsModel, CliError> {
    match model {
        Model::Classical(m) => Ok(m.clone()),
        Model::Stabilizer(_) => Err(CliError::Config(format!("{what} needs a classical model"))),
    }
}

fn stabilizer<'a>(model: &'a Model, what: &str) -> Result<&'a StabilizerHamiltonian, CliError> {
    match model {
        Model::Stabilizer(h) => Ok(h),
        Model::Classical(_) => Err(CliError::Config(format!("{what} needs a Pauli model"))),
    }
}

fn radius_cell(m: &Member) -> String {
    m.radius.map_or_else(String::new, |r| r.to_string())
}

fn distance_cell(g: &Hypergraph, t: &Tripartition) -> Result<(String, Option<f64>), CliError> {
    Ok(match g.distance(&t.a, &t.c)? {
        Some(d) => (d.to_string(), Some(d as f64)),
        None => ("inf".into(), None),
    })
}

/// Rows `(epsilon, radius, d_ac, cmi, xi)`. For Pauli models the CMI is the
/// label-space CMI, which equals the quantum CMI of the noisy Gibbs state.
pub fn run_cmi_sweep(
    cfg: &ExperimentConfig,
    model: &Model,
    budget: Budget,
) -> Result<Table, CliError> {
    let g = model.graph();
    let family = tripartition_family(cfg.tripartition.as_ref(), g)?;
    let eps_list = epsilons(&cfg.noise)?;
    let mut table = Table::new(&["epsilon", "radius", "d_ac", "cmi", "xi"]);

    let sweeps: Vec<Vec<f64>> = match model {
        Model::Classical(m) => {
            check_budget(budget, g.dims(), "clean distribution")?;
            let processes: Vec<LayeredProcess> = eps_list
                .iter()
                .map(|&e| classical_process(&cfg.noise, g, e))
                .collect::<Result<_, _>>()?;
            let clean = m.exact_distribution(budget)?;
            processes
                .iter()
                .map(|proc| {
                    let noisy = apply_process(&clean, proc, budget)?;
                    family
                        .iter()
                        .map(|mem| Ok(noisy.cmi(&mem.tri)?))
                        .collect::<Result<Vec<_>, CliError>>()
                })
                .collect::<Result<_, _>>()?
        }
        Model::Stabilizer(h) => {
            check_dense(h)?;
            check_budget(budget, &vec![h.q(); h.n_generators()], "label distribution")?;
            let regions: Vec<_> = family
                .iter()
                .map(|m| label_regions(h, &m.tri))
                .collect::<Result<_, _>>()?;
            let channel_sets: Vec<Vec<QuantumChannel>> = eps_list
                .iter()
                .map(|&e| quantum_channels(&cfg.noise, h, e))
                .collect::<Result<_, _>>()?;
            channel_sets
                .iter()
                .map(|channels| {
                    let p = noisy_label_distribution(h, cfg.beta, channels, budget)?;
                    regions
                        .iter()
                        .map(|r| Ok(p.cmi_regions(&r.a_side(), &r.b, &r.c_side())?))
                        .collect::<Result<Vec<_>, CliError>>()
                })
                .collect::<Result<_, _>>()?
        }
    };

    for (eps, cmis) in eps_list.iter().zip(&sweeps) {
        let mut samples = Vec::new();
        let mut cells = Vec::new();
        for (mem, &cmi) in family.iter().zip(cmis) {
            let (d_cell, d) = distance_cell(g, &mem.tri)?;
            if let Some(d) = d {
                samples.push((d, cmi));
            }
            cells.push((radius_cell(mem), d_cell, cmi));
        }
        let xi = fit_markov_length(&samples).map_or(f64::NAN, |f| f.xi);
        for (radius, d_cell, cmi) in cells {
            table.push(vec![
                fmt_f64(*eps),
                radius,
                d_cell,
                fmt_f64(cmi),
                fmt_f64(xi),
            ]);
        }
    }
    Ok(table)
}

/// Rows `(epsilon, w_max, truncated ln P̃, exact ln P̃, residual,
/// |F_AC| truncated, analytic bound, KP margin)` for the pinned model
/// obtained by observing single-site noise on B.
pub fn run_expansion_report(
    cfg: &ExperimentConfig,
    model: &Model,
    budget: Budget,
) -> Result<Table, CliError> {
    let m = classical(model, "expansion")?;
    let g = m.graph();
    let family = tripartition_family(cfg.tripartition.as_ref(), g)?;
    let [member] = family.as_slice() else {
        return Err(CliError::Config(
            "expansion needs a single tripartition; set radius_max = radius_min".into(),
        ));
    };
    let tri = &member.tri;
    if cfg.noise.depth != 1 || cfg.noise.layout != Layout::SingleSite {
        return Err(CliError::Config(
            "expansion needs depth-1 single_site noise".into(),
        ));
    }
    check_budget(budget, g.dims(), "pinned model")?;
    let eps_list = epsilons(&cfg.noise)?;
    let b = tri.b.sites().to_vec();
    let observation = cfg
        .expansion
        .observation
        .clone()
        .unwrap_or_else(|| vec![0; b.len()]);
    let ac = tri.ac();
    let x_ac = cfg
        .expansion
        .x_ac
        .clone()
        .unwrap_or_else(|| vec![0; ac.len()]);
    if x_ac.len() != ac.len() {
        return Err(CliError::Config(format!(
            "expansion.x_ac needs {} entries",
            ac.len()
        )));
    }
    if let Some((v, _)) = ac.iter().zip(&x_ac).find(|(v, &s)| s >= g.dim(*v)) {
        return Err(CliError::Config(format!(
            "expansion.x_ac value out of range at site {v}"
        )));
    }
    let w_max = cfg.expansion.w_max.unwrap_or(b.len());
    if w_max < 1 {
        return Err(CliError::Config(
            "expansion.w_max must be at least 1".into(),
        ));
    }
    let d_ac = g.distance(&tri.a, &tri.c)?;
    let boundary = g.boundary(&tri.a).len().min(g.boundary(&tri.c).len()) as f64;

    let mut table = Table::new(&[
        "epsilon",
        "w_max",
        "log_p_tilde_truncated",
        "log_p_tilde_exact",
        "residual",
        "f_ac_truncated_abs",
        "f_ac_bound",
        "kp_margin",
    ]);
    for eps in eps_list {
        let channels: Vec<LocalChannel> = b
            .iter()
            .map(|&v| classical_channel(cfg.noise.channel, vec![v], vec![g.dim(v)], eps))
            .collect::<Result<_, _>>()?;
        let pinned = pin_single_site(&m, &channels, &observation)?;
        let expansion = ClusterExpansion::new(&pinned, tri, w_max)?;
        let mut x = pinned.favored().to_vec();
        for (v, &s) in ac.iter().zip(&x_ac) {
            x[v] = s;
        }
        let report = expansion.evaluate(&pinned, &x, budget)?;
        let p_min_c = critical_pinning(
            pinned.degree().max(1),
            pinned.h_max(),
            pinned.q_eff().max(2),
        );
        let rate = pinned.p_min() - p_min_c;
        let bound = match d_ac {
            _ if rate <= 0.0 => f64::NAN,
            Some(d) => boundary * (-rate * d as f64).exp(),
            None => 0.0,
        };
        for w in 1..=w_max {
            let truncated = report.log_p_tilde_partial[w - 1];
            let margin = if rate >= 0.0 {
                kp_certificate(&pinned, 1.0, rate, w)?.margin
            } else {
                f64::NAN
            };
            table.push(vec![
                fmt_f64(eps),
                w.to_string(),
                fmt_f64(truncated),
                fmt_f64(report.exact_log_p_tilde),
                fmt_f64((truncated - report.exact_log_p_tilde).abs()),
                fmt_f64(report.f_ac_partial[w - 1].abs()),
                fmt_f64(bound),
                fmt_f64(margin),
            ]);
        }
    }
    Ok(table)
}

/// Rows `(degree, beta, q, depth, p_min_c, eps_c, residual)`. The critical
/// pinning uses `h_max = β` and the blocked dimension `q_eff = q^depth`.
pub fn run_thresholds(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let t = &cfg.thresholds;
    if t.degree.iter().any(|&d| d < 1) || t.depth.iter().any(|&d| d < 1) {
        return Err(CliError::Config(
            "thresholds.degree and thresholds.depth must be at least 1".into(),
        ));
    }
    if t.q.iter().any(|&q| q < 2) {
        return Err(CliError::Config(
            "thresholds.q entries must be at least 2".into(),
        ));
    }
    if t.beta.iter().any(|&b| !b.is_finite() || b < 0.0) {
        return Err(CliError::Config(
            "thresholds.beta entries must be finite and nonnegative".into(),
        ));
    }
    let mut table = Table::new(&[
        "degree", "beta", "q", "depth", "p_min_c", "eps_c", "residual",
    ]);
    for &degree in &t.degree {
        for &beta in &t.beta {
            for &q in &t.q {
                for &depth in &t.depth {
                    let q_eff = q.checked_pow(depth as u32).ok_or_else(|| {
                        CliError::Config(format!("q^depth overflows for q={q}, depth={depth}"))
                    })?;
                    let eps_c = critical_epsilon(degree, beta, q, depth);
                    table.push(vec![
                        degree.to_string(),
                        fmt_f64(beta),
                        q.to_string(),
                        depth.to_string(),
                        fmt_f64(critical_pinning(degree, beta, q_eff)),
                        fmt_f64(eps_c),
                        fmt_f64(threshold_residual(eps_c, degree, beta, q, depth)),
                    ]);
                }
            }
        }
    }
    Ok(table)
}

/// Rows `(epsilon, r, recovery_error, tv_no_recovery)`.
pub fn run_recovery(
    cfg: &ExperimentConfig,
    model: &Model,
    budget: Budget,
) -> Result<Table, CliError> {
    let m = classical(model, "recover")?;
    let g = m.graph();
    check_budget(budget, g.dims(), "clean distribution")?;
    let radii = &cfg.recovery.radii;
    if radii.is_empty() || radii.contains(&0) {
        return Err(CliError::Config(
            "recovery.radii must be nonempty and positive".into(),
        ));
    }
    let eps_list = epsilons(&cfg.noise)?;
    let processes: Vec<LayeredProcess> = eps_list
        .iter()
        .map(|&e| classical_process(&cfg.noise, g, e))
        .collect::<Result<_, _>>()?;
    let clean = m.exact_distribution(budget)?;
    let mut table = Table::new(&["epsilon", "r", "recovery_error", "tv_no_recovery"]);
    for (eps, proc) in eps_list.iter().zip(&processes) {
        let noisy = apply_process(&clean, proc, budget)?;
        let tv_none = clean.tv_distance(&noisy)?;
        for &r in radii {
            let recs = trotterized_recoveries(&clean, proc, g, r, budget)?;
            let err = recovery_error(&clean, proc, &recs, budget)?;
            table.push(vec![
                fmt_f64(*eps),
                r.to_string(),
                fmt_f64(err),
                fmt_f64(tv_none),
            ]);
        }
    }
    Ok(table)
}

fn check_row(table: &mut Table, check: &str, subject: String, value: f64, tol: f64) -> bool {
    let pass = value <= tol;
    table.push(vec![
        check.to_string(),
        subject,
        fmt_f64(value),
        fmt_f64(tol),
        if pass { "PASS" } else { "FAIL" }.to_string(),
    ]);
    pass
}

/// Rows `(check, subject, value, tolerance, status)`:
/// the label distribution against `Tr[Π_s ρ]`, the clean and noisy states
/// against their projector mixtures, stabilizer mixing of every channel, and
/// quantum against label-space CMI on every tripartition.
pub fn run_stabilizer_check(
    cfg: &ExperimentConfig,
    model: &Model,
    budget: Budget,
) -> Result<Table, CliError> {
    let h = stabilizer(model, "stabilizer-check")?;
    if !is_prime(h.q()) {
        return Err(CliError::Config(format!("q = {} is not prime", h.q())));
    }
    check_dense(h)?;
    check_budget(budget, &vec![h.q(); h.n_generators()], "label distribution")?;
    let family = match &cfg.tripartition {
        Some(spec) => tripartition_family(Some(spec), h.graph())?,
        None => Vec::new(),
    };
    let regions: Vec<_> = family
        .iter()
        .map(|m| label_regions(h, &m.tri))
        .collect::<Result<_, _>>()?;
    let eps_list = epsilons(&cfg.noise)?;
    let channel_sets: Vec<Vec<QuantumChannel>> = eps_list
        .iter()
        .map(|&e| quantum_channels(&cfg.noise, h, e))
        .collect::<Result<_, _>>()?;
    let beta = cfg.beta;

    let mut table = Table::new(&["check", "subject", "value", "tolerance", "status"]);
    let rho = DensityMatrix::gibbs(h, beta)?;
    let p = stabilizer_distribution(h, beta)?.exact_distribution(budget)?;
    let traces = label_probabilities(h, &rho)?;
    let label_err = traces
        .iter()
        .zip(p.probs())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    check_row(
        &mut table,
        "label_distribution",
        "clean".into(),
        label_err,
        IDENTITY_TOL,
    );
    let rebuilt = trace_norm(&(reconstruct_state(h, &p)? - rho.matrix()));
    check_row(
        &mut table,
        "state_reconstruction",
        "clean".into(),
        rebuilt,
        IDENTITY_TOL,
    );

    for (eps, channels) in eps_list.iter().zip(&channel_sets) {
        let tag = format!("eps={}", fmt_f64(*eps));
        let mut mixing = true;
        for ch in channels.iter().take(channels.len() / cfg.noise.depth) {
            let report = stabilizer_mixing_report(ch, h)?;
            let subject = format!("{tag} site={}", ch.support()[0]);
            mixing &= check_row(
                &mut table,
                "stabilizer_mixing",
                subject,
                report.max_residual,
                IDENTITY_TOL,
            );
        }
        if !mixing {
            continue;
        }
        let mut noisy = rho.clone();
        for ch in channels {
            noisy = noisy.apply(ch)?;
        }
        let p_noisy = noisy_label_distribution(h, beta, channels, budget)?;
        let err = trace_norm(&(reconstruct_state(h, &p_noisy)? - noisy.matrix()));
        check_row(
            &mut table,
            "state_reconstruction",
            tag.clone(),
            err,
            IDENTITY_TOL,
        );
        for (mem, r) in family.iter().zip(&regions) {
            let quantum = markovlen::stabilizer::quantum_cmi(&noisy, &mem.tri)?;
            let classical = p_noisy.cmi_regions(&r.a_side(), &r.b, &r.c_side())?;
            let subject = match mem.radius {
                Some(rad) => format!("{tag} radius={rad}"),
                None => tag.clone(),
            };
            check_row(
                &mut table,
                "cmi_equality",
                subject,
                (quantum - classical).abs(),
                CMI_TOL,
            );
        }
    }
    Ok(table)
}
