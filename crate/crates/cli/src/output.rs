//! CSV rendering with a commented header block.

use sha2::{Digest, Sha256};

use crate::config::ExperimentKind;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

/// Shortest round-trip scientific notation; `nan`, `inf` and `-inf` for
/// non-finite values.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:e}")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn units(kind: ExperimentKind) -> &'static [&'static str] {
    match kind {
        ExperimentKind::CmiSweep => &[
            "epsilon: channel strength (dimensionless)",
            "radius, d_ac: hyperedge hops",
            "cmi: nats (natural log); label-space CMI for Pauli models",
            "xi: hyperedge hops, least-squares fit of ln cmi against d_ac per epsilon; nan when no fit",
        ],
        ExperimentKind::Expansion => &[
            "epsilon: channel strength (dimensionless)",
            "w_max: maximum cluster weight (sites)",
            "log_p_tilde_*, residual, f_ac_*: nats",
            "f_ac_bound: min(|dA|,|dC|) exp(-(p_min - p_min_c) d_ac), nan unless p_min > p_min_c",
            "kp_margin: min over polymers of a|g| - sum, with a = 1 and b = p_min - p_min_c; nan when b < 0",
        ],
        ExperimentKind::Thresholds => &[
            "beta: inverse temperature with local terms of norm at most 1",
            "p_min_c: nats, with h_max = beta and q_eff = q^depth",
            "eps_c: channel strength (dimensionless)",
            "residual: depth ln(1-eps_c) - ln eps_c minus the threshold, nats",
        ],
        ExperimentKind::Recover => &[
            "epsilon: channel strength (dimensionless)",
            "r: collar radius in hyperedge hops",
            "recovery_error, tv_no_recovery: total variation, tv = 1/2 sum |p - q|",
        ],
        ExperimentKind::StabilizerCheck => &[
            "label_distribution: max absolute probability difference",
            "state_reconstruction: trace norm",
            "stabilizer_mixing: Frobenius norm of the image outside the projector span",
            "cmi_equality: |quantum - label| CMI in nats",
        ],
    }
}

pub struct Header<'a> {
    pub kind: ExperimentKind,
    pub config: &'a [u8],
    pub budget_bits: u32,
}

pub fn render(header: &Header, table: &Table) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# {} {}\n",
        env!("CARGO_PKG_NAME"),
        env!("CARGO_PKG_VERSION")
    ));
    out.push_str(&format!("# experiment: {}\n", header.kind.name()));
    out.push_str(&format!("# config-sha256: {}\n", sha256_hex(header.config)));
    out.push_str(&format!("# budget-bits: {}\n", header.budget_bits));
    for line in units(header.kind) {
        out.push_str(&format!("# units: {line}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.columns).expect("writing to memory");
    for row in &table.rows {
        w.write_record(row).expect("writing to memory");
    }
    let body = w.into_inner().expect("flushing to memory");
    out.push_str(&String::from_utf8(body).expect("CSV cells are UTF-8"));
    out
}
