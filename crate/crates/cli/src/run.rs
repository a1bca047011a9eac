//! Scenario execution: each scenario turns a validated config into tables.

use serde_json::{json, Map};
use tunneltime::hfe::{self, AbsorptionScanOptions, TimeDefinition};
use tunneltime::photonic::{self, LossTimeOptions, PhotonTunnellingReport};
use tunneltime::times::{opaque_limits, time_catalog, TimeCatalog};
use tunneltime::wavepacket::{
    self, oracle, EvolveOptions, GaussianPacket, Grid, GridOptions, SpectralWeighting, TimeStatistics,
};
use tunneltime::{PhysicalConstants, RectangularBarrier, Result};

use crate::config::{PacketSpec, PhotonicSpec, RunConfig, Scenario};
use crate::output::{Artifacts, Cell, Table};

pub const TIMES_COLUMNS: [&str; 10] = [
    "energy",
    "width",
    "phase_time",
    "phase_time_phi2",
    "dwell_time",
    "larmor_first",
    "larmor_second",
    "buttiker_landauer",
    "feynman_re",
    "feynman_im",
];

pub const HFE_SCAN_COLUMNS: [&str; 8] = [
    "width",
    "kappa_a",
    "phase_time",
    "dwell_time",
    "larmor_second",
    "buttiker_landauer",
    "feynman_re",
    "feynman_im",
];

const SATURATION_COLUMNS: [&str; 4] = ["definition", "saturated", "plateau_value", "onset_kappa_a"];

pub const WAVEPACKET_COLUMNS: [&str; 13] = [
    "energy",
    "relative_spread",
    "center",
    "width",
    "mean_entry",
    "mean_exit",
    "mean_tunnelling",
    "predicted_mean_tunnelling",
    "variance",
    "entry_variance",
    "dynamical_variance",
    "second_moment",
    "transmission",
];

const FLUX_COLUMNS: [&str; 3] = ["time", "flux_entry", "flux_exit"];

pub const PHOTONIC_COLUMNS: [&str; 7] = [
    "kappa_e",
    "opacity",
    "phase_time",
    "effective_velocity",
    "superluminal",
    "loss_time",
    "angular_deviation",
];

pub const ABSORPTION_COLUMNS: [&str; 7] = [
    "absorption",
    "width",
    "quotient",
    "hfe_expected",
    "elasticity",
    "saturation_survives",
    "agrees",
];

const ABSORPTION_ROW_COLUMNS: [&str; 6] = [
    "absorption",
    "asymptotic_slope",
    "saturated",
    "plateau_value",
    "max_quotient",
    "hfe_expected",
];

pub fn execute(config: &RunConfig) -> Result<Artifacts> {
    let c = &config.constants;
    match &config.scenario {
        Scenario::Times { barrier, energy } => times(barrier, *energy, c),
        Scenario::HfeScan {
            template,
            energy,
            widths,
            tolerance,
            gnuplot,
        } => hfe_scan(template, *energy, widths, *tolerance, *gnuplot, c),
        Scenario::AbsorptionScan {
            template,
            energy,
            widths,
            absorptions,
            tolerance,
            threshold,
        } => absorption_scan(template, *energy, widths, absorptions, *tolerance, *threshold, c),
        Scenario::Wavepacket { barrier, packet } => packet_run(barrier, packet, c),
        Scenario::Photonic(spec) => photonic_run(spec, c),
    }
}

fn times(barrier: &RectangularBarrier, energy: f64, c: &PhysicalConstants) -> Result<Artifacts> {
    let catalog = time_catalog(barrier, energy, c)?;
    let limits = opaque_limits(barrier, energy, c)?;
    let mut main = Table::new("times", &TIMES_COLUMNS);
    main.push(vec![
        energy.into(),
        barrier.width().into(),
        catalog.phase_time.into(),
        catalog.phase_time_phi2.into(),
        catalog.dwell_time.into(),
        catalog.larmor_first.into(),
        catalog.larmor_second.into(),
        catalog.buttiker_landauer.into(),
        catalog.feynman_time.re.into(),
        catalog.feynman_time.im.into(),
    ]);
    let mut summary = Map::new();
    summary.insert(
        "opaque_limits".into(),
        json!({
            "phase_limit": limits.phase_limit,
            "dwell_limit": limits.dwell_limit,
            "fluctuation_limit": limits.fluctuation_limit,
            "divergent": limits.divergent,
        }),
    );
    Ok(Artifacts {
        main,
        companions: Vec::new(),
        summary,
        plot_script: None,
    })
}

fn catalog_cells(row: &TimeCatalog) -> [Cell; 6] {
    [
        row.phase_time.into(),
        row.dwell_time.into(),
        row.larmor_second.into(),
        row.buttiker_landauer.into(),
        row.feynman_time.re.into(),
        row.feynman_time.im.into(),
    ]
}

fn hfe_scan(
    template: &RectangularBarrier,
    energy: f64,
    widths: &[f64],
    tolerance: f64,
    gnuplot: bool,
    c: &PhysicalConstants,
) -> Result<Artifacts> {
    let scan = hfe::scan_widths_with(template, energy, widths, c, tolerance)?;
    let mut main = Table::new("scan", &HFE_SCAN_COLUMNS);
    for ((w, ka), row) in scan.widths.iter().zip(&scan.opacities).zip(&scan.catalog_rows) {
        let mut cells = vec![Cell::from(*w), Cell::from(*ka)];
        cells.extend(catalog_cells(row));
        main.push(cells);
    }
    let mut saturation = Table::new("saturation", &SATURATION_COLUMNS);
    let mut summary = Map::new();
    for (definition, record) in &scan.saturation {
        saturation.push(vec![
            Cell::Text(definition_name(*definition).into()),
            record.saturated.into(),
            record.plateau_value.into(),
            record.onset_opacity.into(),
        ]);
        summary.insert(
            definition_name(*definition).into(),
            json!({
                "saturated": record.saturated,
                "plateau_value": record.plateau_value,
                "onset_kappa_a": record.onset_opacity,
            }),
        );
    }
    Ok(Artifacts {
        main,
        companions: vec![saturation],
        summary,
        plot_script: gnuplot.then(hfe_plot_script),
    })
}

pub fn definition_name(d: TimeDefinition) -> &'static str {
    match d {
        TimeDefinition::Phase => "phase_time",
        TimeDefinition::PhasePhi2 => "phase_time_phi2",
        TimeDefinition::Dwell => "dwell_time",
        TimeDefinition::LarmorFirst => "larmor_first",
        TimeDefinition::LarmorSecond => "larmor_second",
        TimeDefinition::ButtikerLandauer => "buttiker_landauer",
        TimeDefinition::FeynmanRe => "feynman_re",
        TimeDefinition::FeynmanIm => "feynman_im",
    }
}

fn hfe_plot_script() -> String {
    let mut s = String::new();
    s.push_str("# usage: gnuplot -e \"data='{data}'\" script.gp\n");
    s.push_str("if (!exists(\"data\")) data = '{data}'\n");
    s.push_str("set datafile separator ','\n");
    s.push_str("set key autotitle columnhead left top\n");
    s.push_str("set xlabel 'kappa a'\n");
    s.push_str("set ylabel 'time'\n");
    s.push_str("plot for [col=3:8] data using 2:col with linespoints\n");
    s.push_str("pause -1\n");
    s
}

fn absorption_scan(
    template: &RectangularBarrier,
    energy: f64,
    widths: &[f64],
    absorptions: &[f64],
    tolerance: f64,
    threshold: f64,
    c: &PhysicalConstants,
) -> Result<Artifacts> {
    let options = AbsorptionScanOptions {
        saturation_tolerance: tolerance,
        criterion_threshold: threshold,
        ..AbsorptionScanOptions::default()
    };
    let report = hfe::absorption_scan(template, energy, widths, absorptions, c, &options)?;
    let mut main = Table::new("cells", &ABSORPTION_COLUMNS);
    for cell in &report.cells {
        main.push(vec![
            cell.absorption.into(),
            cell.width.into(),
            cell.quotient.into(),
            cell.hfe_expected.into(),
            cell.elasticity.into(),
            cell.saturation_survives.into(),
            cell.agrees().into(),
        ]);
    }
    let mut rows = Table::new("rows", &ABSORPTION_ROW_COLUMNS);
    for row in &report.rows {
        rows.push(vec![
            row.absorption.into(),
            row.asymptotic_slope.into(),
            row.saturation.saturated.into(),
            row.saturation.plateau_value.into(),
            row.max_quotient.into(),
            row.hfe_expected.into(),
        ]);
    }
    let mut summary = Map::new();
    summary.insert("energy".into(), json!(report.energy));
    summary.insert("concordance".into(), json!(report.concordance));
    Ok(Artifacts {
        main,
        companions: vec![rows],
        summary,
        plot_script: None,
    })
}

/// Propagates the configured packet and returns its statistics with the
/// flux records at both barrier edges.
pub fn simulate(
    barrier: &RectangularBarrier,
    spec: &PacketSpec,
    c: &PhysicalConstants,
) -> Result<(GaussianPacket, TimeStatistics, wavepacket::FluxRecord, wavepacket::FluxRecord)> {
    let piecewise = barrier.to_piecewise();
    let packet = GaussianPacket::from_energy(spec.center, spec.energy, spec.relative_spread, c)?;
    let grid = Grid::for_run(
        &packet,
        &piecewise,
        c,
        &GridOptions {
            points_per_wavelength: spec.points_per_wavelength,
            time_step: spec.time_step,
        },
    )?;
    log::info!("grid: {} points, {} steps at dt = {:e}", grid.points, grid.steps, grid.time_step);
    let history = wavepacket::evolve(&packet, &piecewise, &grid, c, &EvolveOptions::for_barrier(&piecewise))?;
    let entry = wavepacket::flux_series(&history, 0.0)?;
    let exit = wavepacket::flux_series(&history, barrier.width())?;
    let stats = wavepacket::tunnelling_statistics(&entry, &exit)?;
    Ok((packet, stats, entry, exit))
}

fn packet_run(barrier: &RectangularBarrier, spec: &PacketSpec, c: &PhysicalConstants) -> Result<Artifacts> {
    let (packet, stats, entry, exit) = simulate(barrier, spec, c)?;
    let piecewise = barrier.to_piecewise();
    let predicted = if barrier.absorption() == 0.0 {
        Some(oracle::predicted_mean_tunnelling(&packet, &piecewise, c, stats.mean_entry)?)
    } else {
        None
    };
    let mut main = Table::new("statistics", &WAVEPACKET_COLUMNS);
    main.push(vec![
        spec.energy.into(),
        spec.relative_spread.into(),
        spec.center.into(),
        barrier.width().into(),
        stats.mean_entry.into(),
        stats.mean_exit.into(),
        stats.mean_tunnelling.into(),
        predicted.into(),
        stats.variance.into(),
        stats.entry_variance.into(),
        stats.dynamical_variance.into(),
        stats.second_moment.into(),
        exit.net_integral().into(),
    ]);
    let mut companions = Vec::new();
    if spec.flux_series {
        let mut flux = Table::new("flux", &FLUX_COLUMNS);
        for ((t, j0), ja) in entry.times.iter().zip(&entry.flux).zip(&exit.flux) {
            flux.push(vec![(*t).into(), (*j0).into(), (*ja).into()]);
        }
        companions.push(flux);
    }
    let mut summary = Map::new();
    summary.insert("entry_backflow".into(), json!(stats.entry_backflow));
    summary.insert("negative_dynamical_variance".into(), json!(stats.negative_dynamical_variance));
    if barrier.absorption() == 0.0 {
        summary.insert(
            "averaged_phase_time".into(),
            json!(oracle::energy_averaged_phase_time(&packet, &piecewise, c, SpectralWeighting::Transmission)?),
        );
    }
    Ok(Artifacts {
        main,
        companions,
        summary,
        plot_script: None,
    })
}

fn photonic_run(spec: &PhotonicSpec, c: &PhysicalConstants) -> Result<Artifacts> {
    let report = match spec {
        PhotonicSpec::Waveguide(g) => photonic::waveguide_report(g, c)?,
        PhotonicSpec::Ftir {
            barrier,
            loss_time_spread,
        } => {
            let loss = match loss_time_spread {
                Some(spread) => {
                    let kappa = photonic::ftir_kappa(barrier)?;
                    let options = LossTimeOptions {
                        relative_spread: *spread,
                        ..LossTimeOptions::default()
                    };
                    Some(photonic::loss_time(kappa, barrier.gap, c, &options)?)
                }
                None => None,
            };
            photonic::ftir_report(barrier, c, loss)?
        }
    };
    Ok(Artifacts {
        main: report_table(&report),
        companions: Vec::new(),
        summary: Map::new(),
        plot_script: None,
    })
}

fn report_table(r: &PhotonTunnellingReport) -> Table {
    let mut t = Table::new("report", &PHOTONIC_COLUMNS);
    t.push(vec![
        r.kappa_e.into(),
        r.opacity.into(),
        r.phase_time.into(),
        r.effective_velocity.into(),
        r.superluminal.into(),
        r.loss_time.into(),
        r.angular_deviation.into(),
    ]);
    t
}
