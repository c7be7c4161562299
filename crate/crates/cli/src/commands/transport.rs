//! Spin-transport commands: the ensemble magnetization decay and the
//! monitored (sampled) run with windowed trajectory dissimilarity.

use crate::config::{resolve, FileConfig};
use crate::output::{fmt_f64, CsvDoc, RunContext};
use crate::CliError;
use dissim_core::transport::{
    build_schedule, detect_transition, estimate_plateau_onset, fit_magnetization_tail,
    flatness_statistic, run_magnetization, run_windowed_dissimilarity, MagnetizationCurve,
    TransportConfig, TrotterSchedule,
};

fn magnetization_csv(curve: &MagnetizationCurve) -> CsvDoc {
    let mut doc = CsvDoc::new("transport-magnetization-v1", &["t", "sz_mean", "stderr"]);
    for i in 0..curve.times.len() {
        doc.push(&[
            fmt_f64(curve.times[i]),
            fmt_f64(curve.mean[i]),
            fmt_f64(curve.stderr[i]),
        ]);
    }
    doc
}

struct CommonParams {
    config: TransportConfig,
    schedule: TrotterSchedule,
}

#[allow(clippy::too_many_arguments)]
fn common_params(
    cfg: &FileConfig,
    master: u64,
    ctx: &mut RunContext,
    qubits: Option<usize>,
    experiments: Option<usize>,
    default_experiments: usize,
    t0: Option<f64>,
    horizon: Option<f64>,
    points: Option<usize>,
    window: usize,
    with_reference: bool,
) -> Result<CommonParams, CliError> {
    let qubits = resolve(qubits, cfg, "qubits", 16)?;
    let experiments = resolve(experiments, cfg, "experiments", default_experiments)?;
    let t0 = resolve(t0, cfg, "t0", 0.01)?;
    let horizon = resolve(horizon, cfg, "horizon", 126.0)?;
    let points = resolve(points, cfg, "points", 4096)?;
    ctx.param("seed", master);
    ctx.param("qubits", qubits);
    ctx.param("experiments", experiments);
    ctx.param("t0", t0);
    ctx.param("horizon", horizon);
    ctx.param("points", points);
    Ok(CommonParams {
        config: TransportConfig {
            qubits,
            with_reference,
            experiments,
            window,
            seed: master,
        },
        schedule: build_schedule(t0, horizon, points)?,
    })
}

pub struct MagnetizationFlags {
    pub qubits: Option<usize>,
    pub experiments: Option<usize>,
    pub t0: Option<f64>,
    pub horizon: Option<f64>,
    pub points: Option<usize>,
    pub fit_min: Option<f64>,
    pub fit_max: Option<f64>,
}

pub fn run_magnetization_cmd(
    flags: &MagnetizationFlags,
    cfg: &FileConfig,
    master: u64,
    ctx: &mut RunContext,
) -> Result<(), CliError> {
    let fit_min = resolve(flags.fit_min, cfg, "fit_min", 5.0)?;
    let fit_max = resolve(flags.fit_max, cfg, "fit_max", 14.7)?;
    if !(fit_min > 0.0) || fit_max <= fit_min {
        return Err(CliError::Usage(format!(
            "fit window needs 0 < fit-min < fit-max, got {fit_min}..{fit_max}"
        )));
    }
    let p = common_params(
        cfg,
        master,
        ctx,
        flags.qubits,
        flags.experiments,
        128,
        flags.t0,
        flags.horizon,
        flags.points,
        1,
        true,
    )?;
    ctx.param("fit_min", fit_min);
    ctx.param("fit_max", fit_max);

    let curve = run_magnetization(&p.config, &p.schedule)?;
    ctx.write_csv("transport_magnetization.csv", &magnetization_csv(&curve))?;

    let mut report = String::new();
    match fit_magnetization_tail(&curve, fit_min, fit_max) {
        Ok(law) => report.push_str(&format!(
            "power_law_fit t in [{fit_min}, {fit_max}]\nexponent {}\namplitude {}\nlog_residual {}\n",
            fmt_f64(law.exponent),
            fmt_f64(law.amplitude),
            fmt_f64(law.residual),
        )),
        Err(e) => report.push_str(&format!("power_law_fit unavailable: {e}\n")),
    }
    match estimate_plateau_onset(&curve) {
        Ok(p) => report.push_str(&format!(
            "plateau {}\nplateau_onset {}\n",
            fmt_f64(p.plateau),
            fmt_f64(p.onset),
        )),
        Err(e) => report.push_str(&format!("plateau_onset unavailable: {e}\n")),
    }
    ctx.write_report("transport_magnetization_report.txt", &report)?;
    print!("{report}");
    Ok(())
}

pub struct DissimFlags {
    pub qubits: Option<usize>,
    pub experiments: Option<usize>,
    pub t0: Option<f64>,
    pub horizon: Option<f64>,
    pub points: Option<usize>,
    pub window: Option<usize>,
    /// true once --control is given; otherwise fall back to the config file.
    pub control: bool,
}

pub fn run_dissim_cmd(
    flags: &DissimFlags,
    cfg: &FileConfig,
    master: u64,
    ctx: &mut RunContext,
) -> Result<(), CliError> {
    let window = resolve(flags.window, cfg, "window", 16)?;
    let control = flags.control || cfg.get::<bool>("control")?.unwrap_or(false);
    let p = common_params(
        cfg,
        master,
        ctx,
        flags.qubits,
        flags.experiments,
        2048,
        flags.t0,
        flags.horizon,
        flags.points,
        window,
        !control,
    )?;
    ctx.param("window", window);
    ctx.param("control", control);

    let output = run_windowed_dissimilarity(&p.config, &p.schedule)?;
    let mono = &output.dissimilarity;
    let mut doc = CsvDoc::new("transport-dissim-v1", &["t_window", "dxt_mean", "dxt_std"]);
    for w in 0..mono.window_times.len() {
        doc.push(&[
            fmt_f64(mono.window_times[w]),
            fmt_f64(mono.mean[w]),
            fmt_f64(mono.std[w]),
        ]);
    }
    ctx.write_csv("transport_dissim.csv", &doc)?;
    ctx.write_csv(
        "transport_dissim_mag.csv",
        &magnetization_csv(&output.magnetization),
    )?;

    let mut report = String::new();
    report.push_str(if control {
        "mode control\n"
    } else {
        "mode reference\n"
    });
    match detect_transition(mono) {
        Ok(t) => {
            match t.time {
                Some(time) => report.push_str(&format!("transition_time {}\n", fmt_f64(time))),
                None => report.push_str("transition_time none\n"),
            }
            report.push_str(&format!(
                "transition_score {} (threshold {})\n",
                fmt_f64(t.score),
                fmt_f64(t.threshold),
            ));
        }
        Err(e) => report.push_str(&format!("transition unavailable: {e}\n")),
    }
    match flatness_statistic(mono) {
        Ok(f) => report.push_str(&format!("flatness {}\n", fmt_f64(f))),
        Err(e) => report.push_str(&format!("flatness unavailable: {e}\n")),
    }
    if !control {
        match estimate_plateau_onset(&output.magnetization) {
            Ok(p) => report.push_str(&format!("plateau_onset {}\n", fmt_f64(p.onset))),
            Err(e) => report.push_str(&format!("plateau_onset unavailable: {e}\n")),
        }
    }
    ctx.write_report("transport_dissim_report.txt", &report)?;
    print!("{report}");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn magnetization_csv_has_exact_initial_point() {
        let config = TransportConfig {
            qubits: 4,
            with_reference: true,
            experiments: 3,
            window: 1,
            seed: 7,
        };
        let schedule = build_schedule(0.1, 1.0, 8).unwrap();
        let curve = run_magnetization(&config, &schedule).unwrap();
        let doc = magnetization_csv(&curve);
        let text = doc.render();
        let first_row = text.lines().nth(2).unwrap();
        assert_eq!(first_row, "0,0.5,0");
        assert_eq!(text.lines().count(), 2 + 9);
    }
}
