use std::fs;

use cfmimo::beamsquint::{
    macro_virtual_transform, squint_report, virtual_angle_transform, SquintReport,
};
use cfmimo::channel::{assemble_channel, OfdmGrid};
use cfmimo::config::{build_scenario, ScenarioConfig};
use cfmimo::correlation::{
    correlation_coefficient_map, estimate_correlation, CorrelationSettings, FrequencySelector,
};
use cfmimo::export::{
    serialize_f64, write_channel_binary, write_channel_csv, write_complex_matrix_csv,
    write_isi_sweep_csv, write_json, write_real_matrix_csv, write_spectrum_csv,
};
use cfmimo::ofdm::{min_cp, simulate_isi};
use cfmimo::scenario::{PathSet, Scenario};
use serde::Serialize;

use crate::manifest::{sha256_hex, ArtifactSet, Manifest, SweepEntry};
use crate::sweep::{self, PointLabel};
use crate::{Args, CliError, Experiment};

/// Everything one sweep point needs.
struct Point<'a> {
    config: &'a ScenarioConfig,
    scenario: Scenario,
    grid: OfdmGrid,
    seed: u64,
    frequency: FrequencySelector,
}

pub fn run(args: &Args) -> Result<(), CliError> {
    if args.frequency.is_some() && args.experiment != Experiment::Correlation {
        return Err(CliError::Input(
            "--frequency only applies to the correlation experiment".into(),
        ));
    }
    let bytes = fs::read(&args.scenario).map_err(|e| {
        CliError::Input(format!(
            "cannot read scenario {}: {e}",
            args.scenario.display()
        ))
    })?;
    let text = std::str::from_utf8(&bytes).map_err(|_| {
        CliError::Input(format!("scenario {} is not UTF-8", args.scenario.display()))
    })?;
    let config = ScenarioConfig::from_toml_str(text)?;
    let scenario = build_scenario(&config)?;
    let grid = config.grid()?;
    let seed = args.seed.unwrap_or(config.paths.seed);
    let frequency = args.frequency.unwrap_or(FrequencySelector::BandAverage);

    let mut artifacts = ArtifactSet::default();
    match &args.sweep {
        None => {
            let point = Point {
                config: &config,
                scenario,
                grid,
                seed,
                frequency,
            };
            artifacts = run_point(args.experiment, &point)?;
        }
        Some(sw) => {
            for (i, &value) in sw.values.iter().enumerate() {
                let (scenario, grid) = sweep::apply(sw.param, value, &scenario, &grid)?;
                let point = Point {
                    config: &config,
                    scenario,
                    grid,
                    seed,
                    frequency,
                };
                let files = run_point(args.experiment, &point)?;
                artifacts.extend_under(&PointLabel(sw, i).to_string(), files);
            }
        }
    }

    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION"),
        scenario: args.scenario.display().to_string(),
        scenario_checksum: sha256_hex(&bytes),
        seed,
        experiment: args.experiment.name(),
        sweep: args.sweep.as_ref().map(|sw| SweepEntry {
            parameter: sw.param.name(),
            values: sw.values.clone(),
        }),
        artifacts: Vec::new(),
    };
    artifacts.write(&args.out, manifest)
}

fn run_point(experiment: Experiment, point: &Point) -> Result<ArtifactSet, CliError> {
    let generator = point.config.path_generator()?;
    let paths = generator.generate(&point.scenario, point.seed)?;
    match experiment {
        Experiment::Channel => channel(&paths, point),
        Experiment::Squint => squint(&paths, point),
        Experiment::Cp => cp(&paths, point),
        Experiment::IsiSweep => isi_sweep(&paths, point),
        Experiment::Correlation => correlation(point),
    }
}

fn render(f: impl FnOnce(&mut Vec<u8>) -> cfmimo::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn channel(paths: &PathSet, point: &Point) -> Result<ArtifactSet, CliError> {
    let tensors = (0..point.scenario.num_ues())
        .map(|k| assemble_channel(paths, &point.grid, k))
        .collect::<cfmimo::Result<Vec<_>>>()?;
    let mut out = ArtifactSet::default();
    out.add("channel.csv", render(|w| write_channel_csv(w, &tensors))?);
    for t in &tensors {
        out.add(
            format!("channel_ue{}.bin", t.ue()),
            render(|w| write_channel_binary(w, t))?,
        );
    }
    Ok(out)
}

#[derive(Serialize)]
struct ApSquint {
    ap: usize,
    #[serde(flatten)]
    report: SquintReport,
}

#[derive(Serialize)]
struct SquintSummary {
    ue: usize,
    micro: Vec<ApSquint>,
    #[serde(rename = "macro")]
    macro_: SquintReport,
}

fn squint(paths: &PathSet, point: &Point) -> Result<ArtifactSet, CliError> {
    let mut out = ArtifactSet::default();
    for k in 0..point.scenario.num_ues() {
        let tensor = assemble_channel(paths, &point.grid, k)?;
        let mut micro = Vec::new();
        for l in 0..point.scenario.num_aps() {
            let spectrum = virtual_angle_transform(&tensor, l)?;
            out.add(
                format!("squint_micro_ue{k}_ap{l}.csv"),
                render(|w| write_spectrum_csv(w, &spectrum))?,
            );
            let doas = paths.paths(k, l).iter().map(|p| p.doa).collect();
            micro.push(ApSquint {
                ap: l,
                report: squint_report(&spectrum)?.with_reference_doas(doas),
            });
        }
        let spectrum = macro_virtual_transform(&point.scenario, &point.grid, k)?;
        out.add(
            format!("squint_macro_ue{k}.csv"),
            render(|w| write_spectrum_csv(w, &spectrum))?,
        );
        let summary = SquintSummary {
            ue: k,
            micro,
            macro_: squint_report(&spectrum)?,
        };
        out.add(
            format!("squint_ue{k}.json"),
            render(|w| write_json(w, &summary))?,
        );
    }
    Ok(out)
}

fn cp(paths: &PathSet, point: &Point) -> Result<ArtifactSet, CliError> {
    let mut out = ArtifactSet::default();
    for k in 0..point.scenario.num_ues() {
        let report = min_cp(paths, &point.grid, k)?;
        out.add(
            format!("cp_report_ue{k}.json"),
            render(|w| write_json(w, &report))?,
        );
    }
    Ok(out)
}

fn isi_sweep(paths: &PathSet, point: &Point) -> Result<ArtifactSet, CliError> {
    let isi = &point.config.isi;
    let num_sc = point.grid.num_subcarriers();
    if let Some(cp) = isi.cp_values.iter().find(|&&cp| cp > num_sc) {
        return Err(CliError::Input(format!(
            "invalid configuration `isi.cp_values`: {cp} exceeds the {num_sc}-sample OFDM symbol"
        )));
    }
    let mut out = ArtifactSet::default();
    for k in 0..point.scenario.num_ues() {
        let rows = isi
            .cp_values
            .iter()
            .map(|&cp| {
                simulate_isi(paths, &point.grid, k, cp, isi.num_symbols, point.seed)
                    .map(|evm| (cp, evm))
            })
            .collect::<cfmimo::Result<Vec<_>>>()?;
        out.add(
            format!("isi_sweep_ue{k}.csv"),
            render(|w| write_isi_sweep_csv(w, &rows))?,
        );
    }
    Ok(out)
}

#[derive(Serialize)]
struct CorrelationMeta {
    ue: usize,
    num_aps: usize,
    num_antennas: usize,
    num_trials: usize,
    seed: u64,
    frequency: String,
    expectation: cfmimo::correlation::ExpectationMode,
    #[serde(serialize_with = "serialize_f64")]
    trace: f64,
    #[serde(serialize_with = "serialize_f64")]
    min_eigenvalue: f64,
    #[serde(serialize_with = "serialize_f64")]
    hermitian_defect: f64,
    is_psd: bool,
}

fn correlation(point: &Point) -> Result<ArtifactSet, CliError> {
    let generator = point.config.path_generator()?;
    let settings = CorrelationSettings {
        num_trials: point.config.correlation.num_trials,
        seed: point.seed,
        frequency: point.frequency,
        mode: point.config.correlation.expectation,
    };
    let mut out = ArtifactSet::default();
    for k in 0..point.scenario.num_ues() {
        let report = estimate_correlation(&point.scenario, &generator, &point.grid, k, &settings)?;
        out.add(
            format!("correlation_full_ue{k}.csv"),
            render(|w| write_complex_matrix_csv(w, &report.full))?,
        );
        out.add(
            format!("correlation_macro_ue{k}.csv"),
            render(|w| write_complex_matrix_csv(w, &report.macro_matrix))?,
        );
        let coeff = correlation_coefficient_map(&report)?;
        out.add(
            format!("correlation_coeff_ue{k}.csv"),
            render(|w| write_real_matrix_csv(w, &coeff))?,
        );
        let meta = CorrelationMeta {
            ue: k,
            num_aps: report.num_aps,
            num_antennas: report.num_antennas,
            num_trials: report.num_trials,
            seed: report.seed,
            frequency: report.frequency.to_string(),
            expectation: report.mode,
            trace: report.trace(),
            min_eigenvalue: report.min_eigenvalue(),
            hermitian_defect: report.hermitian_defect(),
            is_psd: report.is_psd(),
        };
        out.add(
            format!("correlation_ue{k}.json"),
            render(|w| write_json(w, &meta))?,
        );
    }
    Ok(out)
}
