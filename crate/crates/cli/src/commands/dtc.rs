//! Driven-spin-chain commands: response curve over drive imperfection, and
//! echo-distance histograms at fixed imperfection.

use crate::config::{resolve, FileConfig};
use crate::output::{fmt_f64, CsvDoc, RunContext};
use crate::CliError;
use dissim_core::dtc::{
    dissimilarity_vs_epsilon, estimate_epsilon_c, hamming_histogram, run_circuit, BitstringRecord,
    CurvePoint, DisorderRealization,
};
use dissim_core::seeding::task_seed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub fn epsilon_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if min < 0.0 || max < min || !(step > 0.0) {
        return Err(CliError::Usage(format!(
            "epsilon grid needs 0 <= eps-min <= eps-max and eps-step > 0, \
             got min={min}, max={max}, step={step}"
        )));
    }
    let n = ((max - min) / step + 0.5).floor() as usize + 1;
    Ok((0..n).map(|i| min + i as f64 * step).collect())
}

fn curve_csv(curve: &[CurvePoint]) -> CsvDoc {
    let mut doc = CsvDoc::new("dtc-curve-v1", &["epsilon", "mean", "stderr"]);
    for p in curve {
        doc.push(&[fmt_f64(p.epsilon), fmt_f64(p.mean), fmt_f64(p.stderr)]);
    }
    doc
}

pub struct CurveFlags {
    pub qubits: Option<usize>,
    pub realizations: Option<usize>,
    pub cycles: Option<usize>,
    pub eps_min: Option<f64>,
    pub eps_max: Option<f64>,
    pub eps_step: Option<f64>,
}

pub fn run_curve(
    flags: &CurveFlags,
    cfg: &FileConfig,
    master: u64,
    ctx: &mut RunContext,
) -> Result<(), CliError> {
    let qubits = resolve(flags.qubits, cfg, "qubits", 16)?;
    let realizations = resolve(flags.realizations, cfg, "realizations", 512)?;
    let cycles = resolve(flags.cycles, cfg, "cycles", 16)?;
    let eps_min = resolve(flags.eps_min, cfg, "eps_min", 0.0)?;
    let eps_max = resolve(flags.eps_max, cfg, "eps_max", 0.40)?;
    let eps_step = resolve(flags.eps_step, cfg, "eps_step", 0.01)?;
    if realizations == 0 || cycles < 2 {
        return Err(CliError::Usage(format!(
            "need realizations >= 1 and cycles >= 2; got realizations={realizations}, cycles={cycles}"
        )));
    }
    let epsilons = epsilon_grid(eps_min, eps_max, eps_step)?;
    ctx.param("seed", master);
    ctx.param("qubits", qubits);
    ctx.param("realizations", realizations);
    ctx.param("cycles", cycles);
    ctx.param("eps_min", eps_min);
    ctx.param("eps_max", eps_max);
    ctx.param("eps_step", eps_step);

    let curve = dissimilarity_vs_epsilon(qubits, &epsilons, realizations, cycles, master)?;
    ctx.write_csv("dtc_curve.csv", &curve_csv(&curve))?;

    // The crossing estimate needs both fit windows inside the scanned range.
    let ordered = (0.04, 0.10);
    let disordered = (0.25, 0.40);
    let in_range = |w: (f64, f64)| w.0 >= eps_min - 1e-12 && w.1 <= eps_max + 1e-12;
    let report = if in_range(ordered) && in_range(disordered) {
        match estimate_epsilon_c(&curve, ordered, disordered) {
            Ok(cp) => format!(
                "epsilon_c {}\nordered_fit slope={} intercept={} (n={})\n\
                 disordered_fit slope={} intercept={} (n={})\n",
                fmt_f64(cp.epsilon_c),
                fmt_f64(cp.ordered_fit.slope),
                fmt_f64(cp.ordered_fit.intercept),
                cp.ordered_points,
                fmt_f64(cp.disordered_fit.slope),
                fmt_f64(cp.disordered_fit.intercept),
                cp.disordered_points,
            ),
            Err(e) => format!("epsilon_c unavailable: {e}\n"),
        }
    } else {
        "epsilon_c unavailable: scanned range does not cover both fit windows\n".to_string()
    };
    ctx.write_report("dtc_curve_report.txt", &report)?;
    print!("{report}");
    Ok(())
}

/// Bitstring records for `circuits` independent disorder draws, all runs
/// `cycles` cycles long at one imperfection strength.
pub fn hamming_records(
    qubits: usize,
    epsilon: f64,
    circuits: usize,
    cycles: usize,
    master: u64,
) -> Result<Vec<BitstringRecord>, CliError> {
    let runs: Vec<Result<BitstringRecord, CliError>> = (0..circuits)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(task_seed(master, c as u64));
            let disorder = DisorderRealization::random(qubits, epsilon, &mut rng);
            Ok(run_circuit(&disorder, cycles, &mut rng)?)
        })
        .collect();
    runs.into_iter().collect()
}

fn parse_steps(spec: &str) -> Result<(usize, usize), CliError> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(CliError::Usage(format!(
            "--steps takes exactly two comma-separated cycle numbers, got {spec:?}"
        )));
    }
    let a: usize = parts[0]
        .parse()
        .map_err(|_| CliError::Usage(format!("bad step number {:?}", parts[0])))?;
    let b: usize = parts[1]
        .parse()
        .map_err(|_| CliError::Usage(format!("bad step number {:?}", parts[1])))?;
    if a == 0 || b == 0 {
        return Err(CliError::Usage("step numbers are 1-based".into()));
    }
    if a % 2 == b % 2 {
        return Err(CliError::Usage(format!(
            "steps {a},{b} have the same parity; pick one even and one odd cycle"
        )));
    }
    Ok((a, b))
}

pub struct HammingFlags {
    pub qubits: Option<usize>,
    pub circuits: Option<usize>,
    pub cycles: Option<usize>,
    pub epsilon: Option<f64>,
    pub steps: Option<String>,
}

pub fn run_hamming(
    flags: &HammingFlags,
    cfg: &FileConfig,
    master: u64,
    ctx: &mut RunContext,
) -> Result<(), CliError> {
    let qubits = resolve(flags.qubits, cfg, "qubits", 16)?;
    let circuits = resolve(flags.circuits, cfg, "circuits", 512)?;
    let cycles = resolve(flags.cycles, cfg, "cycles", 64)?;
    let epsilon = resolve(flags.epsilon, cfg, "epsilon", 0.04)?;
    let steps_spec: String = resolve(flags.steps.clone(), cfg, "steps", "62,63".to_string())?;
    let (a, b) = parse_steps(&steps_spec)?;
    if circuits == 0 {
        return Err(CliError::Usage("need circuits >= 1".into()));
    }
    if a > cycles || b > cycles {
        return Err(CliError::Usage(format!(
            "steps {a},{b} exceed the {cycles}-cycle run"
        )));
    }
    ctx.param("seed", master);
    ctx.param("qubits", qubits);
    ctx.param("circuits", circuits);
    ctx.param("cycles", cycles);
    ctx.param("epsilon", epsilon);
    ctx.param("steps", &steps_spec);

    let records = hamming_records(qubits, epsilon, circuits, cycles, master)?;
    // Column order is fixed by parity, not by the order given on the command line.
    let (even_step, odd_step) = if a % 2 == 0 { (a, b) } else { (b, a) };
    let (p_even, _) = hamming_histogram(&records, (even_step, even_step))?;
    let (p_odd, _) = hamming_histogram(&records, (odd_step, odd_step))?;
    let mut doc = CsvDoc::new("dtc-hamming-v1", &["d", "p_even", "p_odd"]);
    for d in 0..=qubits {
        doc.push(&[d.to_string(), fmt_f64(p_even[d]), fmt_f64(p_odd[d])]);
    }
    ctx.write_csv("dtc_hamming.csv", &doc)?;
    Ok(())
}
