use std::io::Write;
use std::path::Path;
use std::time::Instant;

use duality_core::lcu::{apply_direct, make_duality_gate, run_duality_circuit, Divider};
use duality_core::product_formulas::{
    multiproduct_exponential_count, multiproduct_params, simulate_multiproduct, suzuki,
    suzuki_exponential_count,
};
use duality_core::taylor::simulate_taylor;
use duality_core::{expm_hermitian, random, spectral_norm, HamiltonianSpec, SimError, Statevector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, Method};
use crate::error::{CliError, Result};

pub const HEADER: [&str; 11] = [
    "method",
    "n",
    "L",
    "t",
    "r",
    "order_param",
    "error_vs_oracle",
    "success_prob",
    "gate_count",
    "wall_ms",
    "error_code",
];

/// One line of a report. Measurement fields are empty when the row failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub method: String,
    pub n: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub t: f64,
    pub r: Option<usize>,
    pub order_param: f64,
    pub error_vs_oracle: Option<f64>,
    pub success_prob: Option<f64>,
    pub gate_count: Option<usize>,
    pub wall_ms: f64,
    pub error_code: String,
}

#[derive(Debug, Clone, Copy)]
struct Job {
    index: usize,
    t: f64,
    param: f64,
}

struct Measurement {
    r: usize,
    error: f64,
    success: f64,
    gates: usize,
}

fn jobs(config: &ExperimentConfig) -> Vec<Job> {
    let params: Vec<f64> = match &config.method {
        Method::Suzuki { chi, .. } => chi.iter().map(|&c| c as f64).collect(),
        Method::Multiproduct { k, .. } => k.iter().map(|&k| k as f64).collect(),
        Method::Taylor { epsilon } => epsilon.clone(),
        Method::LcuRandom { trials, .. } => (0..*trials).map(|i| i as f64).collect(),
    };
    config
        .t_values
        .iter()
        .flat_map(|&t| params.iter().map(move |&param| (t, param)))
        .enumerate()
        .map(|(index, (t, param))| Job { index, t, param })
        .collect()
}

/// Computes every (t, parameter) row. Rows run in parallel and come back in
/// config order; a numerical failure marks its row and the sweep continues.
pub fn run_sweep(config: &ExperimentConfig) -> Vec<ReportRow> {
    let spec = &config.hamiltonian;
    // Shared input state so rows at different t are comparable.
    let psi = random::state(
        vec![spec.dim()],
        &mut ChaCha8Rng::seed_from_u64(config.seed),
    );
    jobs(config)
        .par_iter()
        .map(|job| {
            let start = Instant::now();
            let result = measure(config, spec, &psi, job);
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            let (r, error_vs_oracle, success_prob, gate_count, error_code) = match result {
                Ok(m) => (
                    Some(m.r),
                    Some(m.error),
                    Some(m.success),
                    Some(m.gates),
                    String::new(),
                ),
                Err(e) => (None, None, None, None, e.code().to_string()),
            };
            ReportRow {
                method: config.method.name().to_string(),
                n: spec.num_qubits(),
                l: spec.len(),
                t: job.t,
                r,
                order_param: match config.method {
                    Method::LcuRandom { terms, .. } => terms as f64,
                    _ => job.param,
                },
                error_vs_oracle,
                success_prob,
                gate_count,
                wall_ms,
                error_code,
            }
        })
        .collect()
}

fn measure(
    config: &ExperimentConfig,
    spec: &HamiltonianSpec,
    psi: &Statevector,
    job: &Job,
) -> std::result::Result<Measurement, SimError> {
    let t = job.t;
    match &config.method {
        Method::Suzuki { r, .. } => {
            let chi = job.param as u32;
            let step = suzuki(spec, t / *r as f64, chi)?;
            let approx = step.pow(*r as u64);
            let error = spectral_norm(&(&approx - &expm_hermitian(&spec.matrix(), t)?))?;
            Ok(Measurement {
                r: *r,
                error,
                success: 1.0,
                gates: r * suzuki_exponential_count(spec.len(), chi),
            })
        }
        Method::Multiproduct { gamma, r, .. } => {
            let k = job.param as u32;
            let run = simulate_multiproduct(spec, t, *r, k, *gamma, psi)?;
            let params = multiproduct_params(k, *gamma)?;
            Ok(Measurement {
                r: *r,
                error: run.error_vs_oracle,
                success: run.cumulative_success,
                gates: r * multiproduct_exponential_count(spec.len(), &params),
            })
        }
        Method::Taylor { .. } => {
            let run = simulate_taylor(spec, t, job.param, psi)?;
            let d = run.diagnostics;
            Ok(Measurement {
                r: d.r,
                error: d.total_error,
                success: d.success_probs.iter().product(),
                gates: d.gate_count,
            })
        }
        Method::LcuRandom { terms, .. } => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(job.index as u64 + 1);
            let dim = spec.dim();
            let coeffs = random::coefficients(*terms, 1.0, &mut rng);
            let unitaries = (0..*terms)
                .map(|_| random::unitary(dim, &mut rng))
                .collect();
            let gate = make_duality_gate(coeffs, unitaries)?;
            let evolved = expm_hermitian(&spec.matrix(), t)?.apply(psi.amplitudes())?;
            let input = Statevector::normalized(evolved, vec![dim])?;
            let out = run_duality_circuit(&gate, &input, &Divider::Default)?;
            let direct = Statevector::normalized(apply_direct(&gate, &input)?, vec![dim])?;
            Ok(Measurement {
                r: 1,
                error: out.state.distance(&direct),
                success: out.success_prob,
                gates: terms + 2,
            })
        }
    }
}

pub fn write_csv<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    writer.write_record(HEADER)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush().map_err(|e| CliError::Csv(e.into()))?;
    Ok(())
}

/// Writes the report through a temporary file in the target directory, then
/// renames it into place.
pub fn write_csv_atomic(rows: &[ReportRow], path: &Path) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    write_csv(rows, &mut tmp)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
