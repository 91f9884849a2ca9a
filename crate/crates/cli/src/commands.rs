//! Subcommand bodies: run the library, emit CSV/JSON deterministically,
//! and record a manifest with checksums. Timing lives only in the
//! manifest so the data files are byte-identical across reruns.

use std::path::{Path, PathBuf};
use std::time::Instant;

use kummerlab::report::{format_sig, sha256_hex, CsvTable, Manifest};
use kummerlab::{bh, sieve_lab, singular, varieties};

use crate::config::{BhParams, DensityParams, SeriesParams, SieveParams, VarietyParams};
use crate::AppError;

fn write_text(path: &Path, body: &str) -> Result<String, AppError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| AppError::Runtime(format!("{}: {e}", path.display())))?;
        }
    }
    std::fs::write(path, body).map_err(|e| AppError::Runtime(format!("{}: {e}", path.display())))?;
    Ok(sha256_hex(body.as_bytes()))
}

fn finish_manifest(
    mut manifest: Manifest,
    out_dir: &Path,
    wall_time_secs: f64,
) -> Result<(), AppError> {
    manifest.wall_time_secs = wall_time_secs;
    let path = out_dir.join("manifest.json");
    manifest.write_to(&path).map_err(AppError::from)?;
    println!("manifest: {}", path.display());
    Ok(())
}

pub fn bh_run(params: BhParams, out: Option<PathBuf>) -> Result<(), AppError> {
    let started = Instant::now();
    let cfg = bh::ExperimentConfig::new(
        params.r,
        params.x,
        params.y,
        params.n0,
        params.m0,
        params.trunc_p,
        params.threshold,
    )
    .map_err(|e| AppError::Usage(e.to_string()))?;
    let run = bh::run_experiment(&cfg)?;

    let mut table = CsvTable::new(vec!["k", "lambda_sum", "expected", "deviation", "exceptional"]);
    for rec in &run.records {
        table.push_row(vec![
            rec.k.to_string(),
            format_sig(rec.lambda_sum),
            format_sig(rec.expected),
            format_sig(rec.deviation),
            (rec.is_exceptional as u8).to_string(),
        ]);
    }

    let summary = serde_json::json!({
        "m2": run.summary.m2,
        "m2_over_x2": run.summary.m2_over_x2,
        "exceptional_count": run.summary.exceptional_count,
        "admissible_count": run.summary.admissible_count,
        "degenerate_count": run.summary.degenerate_count,
        "cutoff": run.summary.cutoff,
        "config": serde_json::to_value(&params).expect("params serialize"),
    });
    let summary_body = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";

    println!(
        "bh-run: y={} m2/x^2={} exceptional={}/{}",
        params.y,
        format_sig(run.summary.m2_over_x2),
        run.summary.exceptional_count,
        run.summary.admissible_count
    );

    if let Some(out_dir) = out {
        let mut manifest = Manifest::new(
            "bh-run",
            serde_json::to_value(&params).expect("params serialize"),
            None,
        );
        let csv_path = out_dir.join("bh_run.csv");
        let checksum = table.write_to(&csv_path)?;
        manifest.record_output(&csv_path, checksum)?;
        let summary_path = out_dir.join("summary.json");
        let checksum = write_text(&summary_path, &summary_body)?;
        manifest.record_output(&summary_path, checksum)?;
        finish_manifest(manifest, &out_dir, started.elapsed().as_secs_f64())?;
    } else {
        print!("{summary_body}");
    }
    Ok(())
}

pub fn singular_series(params: SeriesParams, out: Option<PathBuf>) -> Result<(), AppError> {
    let started = Instant::now();
    let rows = singular::series_scan(
        params.r,
        params.n0,
        params.m0,
        params.trunc_p,
        params.k_max,
    )?;

    let mut table = CsvTable::new(vec!["k", "s_trunc", "p", "stability_metric"]);
    for row in &rows {
        table.push_row(vec![
            row.k.to_string(),
            format_sig(row.value),
            row.p_limit.to_string(),
            format_sig(row.stability),
        ]);
    }
    let worst = rows.iter().map(|r| r.stability).fold(0.0f64, f64::max);
    println!(
        "singular-series: {} rows at P={}, worst |S_P - S_2P| = {}",
        rows.len(),
        params.trunc_p,
        format_sig(worst)
    );

    if let Some(out_dir) = out {
        let mut manifest = Manifest::new(
            "singular-series",
            serde_json::to_value(&params).expect("params serialize"),
            None,
        );
        let csv_path = out_dir.join("singular_series.csv");
        let checksum = table.write_to(&csv_path)?;
        manifest.record_output(&csv_path, checksum)?;
        finish_manifest(manifest, &out_dir, started.elapsed().as_secs_f64())?;
    } else {
        print!("{}", table.to_csv_string());
    }
    Ok(())
}

pub fn sieve_lab_run(params: SieveParams, out: Option<PathBuf>) -> Result<(), AppError> {
    let started = Instant::now();
    let reports = sieve_lab::ratio_sweep(
        params.r,
        &params.q_list,
        &params.m_list,
        params.trials,
        params.seed,
        params.primitive_only,
    )?;

    let mut table = CsvTable::new(vec![
        "r",
        "Q",
        "M",
        "lhs_max",
        "delta",
        "ratio",
        "active_term",
        "seed",
    ]);
    for rep in &reports {
        table.push_row(vec![
            rep.r.to_string(),
            format_sig(rep.q),
            format_sig(rep.m),
            format_sig(rep.lhs),
            format_sig(rep.delta),
            format_sig(rep.ratio),
            rep.active_term.label().to_string(),
            rep.seed.to_string(),
        ]);
    }
    let c_emp = reports.iter().map(|r| r.ratio).fold(0.0f64, f64::max);
    println!(
        "sieve-lab: {} cells, grid-wide empirical constant {}",
        reports.len(),
        format_sig(c_emp)
    );

    if let Some(out_dir) = out {
        let mut manifest = Manifest::new(
            "sieve-lab",
            serde_json::to_value(&params).expect("params serialize"),
            Some(params.seed),
        );
        let csv_path = out_dir.join("sieve_lab.csv");
        let checksum = table.write_to(&csv_path)?;
        manifest.record_output(&csv_path, checksum)?;
        finish_manifest(manifest, &out_dir, started.elapsed().as_secs_f64())?;
    } else {
        print!("{}", table.to_csv_string());
    }
    Ok(())
}

pub fn class_list(bound: u64) -> Result<(), AppError> {
    for d in varieties::class_list(bound) {
        println!("{d}");
    }
    Ok(())
}

pub fn variety_solve(params: VarietyParams) -> Result<(), AppError> {
    let inst = varieties::VarietyInstance::new(params.a, params.r, params.k)
        .map_err(|e| AppError::Usage(e.to_string()))?;
    let budget = varieties::SearchBudget {
        fiber_n_max: params.budget,
        fallback_t_bound: (params.budget / 10).max(10),
        always_run_fallback: false,
    };
    let report = varieties::integral_point_search(&inst, &budget)?;

    let describe = |outcome: &varieties::PathOutcome| match outcome {
        varieties::PathOutcome::Found(pt) => {
            serde_json::json!({"found": {"y": pt.y, "z": pt.z, "t": pt.t}})
        }
        varieties::PathOutcome::Exhausted(detail) => serde_json::json!({"exhausted": detail}),
    };
    let body = serde_json::json!({
        "a": params.a,
        "r": params.r,
        "k": params.k,
        "point": report.point.map(|pt| serde_json::json!({"y": pt.y, "z": pt.z, "t": pt.t})),
        "pipeline": describe(&report.pipeline),
        "fallback": report.fallback.as_ref().map(describe),
        "field": {
            "discriminant": inst.field().discriminant,
            "ramified": inst.field().ramified,
            "class_number": inst.field().class_number,
            "narrow_class_number": inst.field().narrow_class_number,
        },
    });
    println!("{}", serde_json::to_string_pretty(&body).expect("report serializes"));
    Ok(())
}

pub fn density(params: DensityParams, out: Option<PathBuf>) -> Result<(), AppError> {
    let started = Instant::now();
    let report = varieties::density_report(params.d, params.r, params.k_max, params.b)?;

    let mut table = CsvTable::new(vec!["k", "representable", "n1", "n2", "n3"]);
    for row in &report.rows {
        match row.witness {
            Some((n1, n2, n3)) => table.push_row(vec![
                row.k.to_string(),
                "1".to_string(),
                n1.to_string(),
                n2.to_string(),
                n3.to_string(),
            ]),
            None => table.push_row(vec![
                row.k.to_string(),
                "0".to_string(),
                String::new(),
                String::new(),
                String::new(),
            ]),
        }
    }

    println!(
        "density: d={} r={} K={}: {}/{} representable ({})",
        params.d,
        params.r,
        params.k_max,
        report.representable,
        params.k_max,
        format_sig(report.fraction)
    );
    if !report.exceptions.is_empty() {
        let head: Vec<String> = report
            .exceptions
            .iter()
            .take(12)
            .map(u64::to_string)
            .collect();
        println!(
            "exceptions ({} total): {}{}",
            report.exceptions.len(),
            head.join(","),
            if report.exceptions.len() > 12 { ",..." } else { "" }
        );
    }

    if let Some(out_dir) = out {
        let mut manifest = Manifest::new(
            "density",
            serde_json::to_value(&params).expect("params serialize"),
            None,
        );
        let csv_path = out_dir.join("density.csv");
        let checksum = table.write_to(&csv_path)?;
        manifest.record_output(&csv_path, checksum)?;
        finish_manifest(manifest, &out_dir, started.elapsed().as_secs_f64())?;
    }
    Ok(())
}
