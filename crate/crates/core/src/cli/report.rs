use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use super::build::BUILD_SUMMARY;
use super::characterize::CHARACTERIZE_SUMMARY;
use super::diagnose::DIAGNOSE_SUMMARY;
use super::files::read_json;
use super::{BuildSummary, CharacterizeSummary, CliError, DiagnoseSummary, FlaggedEdge, RunConfig};

pub const REPORT: &str = "report.md";

/// Renders whichever stage summaries exist in the output directory into
/// `report.md`, in pipeline order.
pub fn cmd_report(config: &RunConfig) -> Result<PathBuf, CliError> {
    let out = &config.out;
    let load = |name: &str| {
        let path = out.join(name);
        path.exists().then_some(path)
    };
    let build: Option<BuildSummary> = load(BUILD_SUMMARY).map(|p| read_json(&p)).transpose()?;
    let characterize: Option<CharacterizeSummary> = load(CHARACTERIZE_SUMMARY)
        .map(|p| read_json(&p))
        .transpose()?;
    let diagnose: Option<DiagnoseSummary> =
        load(DIAGNOSE_SUMMARY).map(|p| read_json(&p)).transpose()?;
    if build.is_none() && characterize.is_none() && diagnose.is_none() {
        return Err(CliError::Usage(format!(
            "no stage summaries in {}",
            out.display()
        )));
    }

    let mut md = String::from("# Supply and demand report\n");
    if let Some(b) = &build {
        render_build(&mut md, b);
    }
    if let Some(c) = &characterize {
        render_characterize(&mut md, c);
    }
    if let Some(d) = &diagnose {
        render_diagnose(&mut md, d);
    }
    let path = out.join(REPORT);
    fs::write(&path, md).map_err(CliError::io(&path))?;
    println!("{}", path.display());
    Ok(path)
}

fn render_build(md: &mut String, b: &BuildSummary) {
    md.push_str(
        "\n## Networks\n\n| window | stops | edges | supply apportioned |\n|---|---:|---:|---|\n",
    );
    for n in &b.networks {
        let _ = writeln!(
            md,
            "| {} | {} | {} | {} |",
            n.window,
            n.stops,
            n.edges,
            yes_no(n.supply_apportioned)
        );
    }
    if b.networks.iter().any(|n| n.supply_apportioned) {
        md.push_str("\nApportioned windows split daily trips evenly for lines without per-window trip counts.\n");
    }
}

fn render_characterize(md: &mut String, c: &CharacterizeSummary) {
    md.push_str("\n## Weight distributions\n\n");
    md.push_str("| window | layer | fit | alpha | r² | bins fitted | zero weights |\n|---|---|---|---:|---:|---:|---:|\n");
    for w in &c.networks {
        for l in &w.layers {
            let _ = writeln!(
                md,
                "| {} | {} | {} | {} | {} | {} | {} |",
                w.window,
                l.layer,
                l.fit_method,
                num(l.alpha),
                num(l.r_squared),
                count(l.fit_points),
                count(l.excluded_zeros)
            );
        }
    }

    md.push_str(
        "\n## Cumulative distributions\n\n| window | demand/supply crossing |\n|---|---|\n",
    );
    for w in &c.networks {
        let _ = writeln!(
            md,
            "| {} | {} |",
            w.window,
            w.crossing.as_deref().unwrap_or("-")
        );
    }

    md.push_str("\n## Demand against supply\n\n| window | a | beta | r² | edges | excluded |\n|---|---:|---:|---:|---:|---:|\n");
    for w in &c.networks {
        match &w.allometry {
            Some(a) => {
                let _ = writeln!(
                    md,
                    "| {} | {:.4} | {:.4} | {:.4} | {} | {} |",
                    w.window, a.a, a.beta, a.r_squared, a.n, a.excluded
                );
            }
            None => {
                let _ = writeln!(md, "| {} | - | - | - | - | - |", w.window);
            }
        }
    }

    md.push_str(
        "\n## Communities\n\n| window | layer | communities | modularity |\n|---|---|---:|---:|\n",
    );
    for w in &c.networks {
        for l in &w.layers {
            let _ = writeln!(
                md,
                "| {} | {} | {} | {} |",
                w.window,
                l.layer,
                count(l.communities),
                num(l.modularity)
            );
        }
    }
    for curve in &c.curves {
        let _ = writeln!(md, "\n### Modularity curve, {} layer\n", curve.layer);
        if let Some(e) = &curve.error {
            let _ = writeln!(md, "Not computed: {e}");
            continue;
        }
        md.push_str("| resolution | k | q |\n|---:|---:|---:|\n");
        for p in &curve.points {
            let _ = writeln!(md, "| {:.4} | {} | {:.4} |", p.resolution, p.k, p.q);
        }
    }

    let problems: Vec<String> = c
        .networks
        .iter()
        .flat_map(|w| {
            let layer_errors = w.layers.iter().flat_map(move |l| {
                l.errors
                    .iter()
                    .map(move |e| format!("{} {}: {e}", w.window, l.layer))
            });
            layer_errors.chain(w.errors.iter().map(move |e| format!("{}: {e}", w.window)))
        })
        .collect();
    if !problems.is_empty() {
        md.push_str("\n### Skipped analyses\n\n");
        for p in problems {
            let _ = writeln!(md, "- {p}");
        }
    }
}

fn render_diagnose(md: &mut String, d: &DiagnoseSummary) {
    md.push_str("\n## Bottlenecks and waste\n\n");
    md.push_str("Bottlenecks are cut edges of the supply communities with IS < 0. ");
    md.push_str("Waste edges are cut edges of the demand communities with ID < 0.\n");
    if !d.attributed {
        md.push_str("\nNo routes were given, so edges are not attributed to lines.\n");
    }
    for w in &d.networks {
        let _ = writeln!(
            md,
            "\n### {}\n\n{} bottlenecks, {} waste, {} lines.\n",
            w.window,
            w.bottlenecks.len(),
            w.waste.len(),
            w.lines.len()
        );
        for e in &w.errors {
            let _ = writeln!(md, "- {e}");
        }
        if !w.bottlenecks.is_empty() || !w.waste.is_empty() {
            md.push_str("| edge | classification | IS | ID | lines |\n|---|---|---:|---:|---|\n");
            for r in w.bottlenecks.iter().chain(&w.waste) {
                edge_row(md, r);
            }
        }
        if !w.lines.is_empty() {
            let _ = writeln!(md, "\nLines: {}", w.lines.join(", "));
        }
    }
}

fn edge_row(md: &mut String, r: &FlaggedEdge) {
    let _ = writeln!(
        md,
        "| ({}, {}) | {} | {:.4} | {:.4} | {} |",
        r.origin,
        r.destination,
        r.classification,
        r.is,
        r.id,
        r.lines.join(", ")
    );
}

fn num(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.4}"))
}

fn count(v: Option<usize>) -> String {
    v.map_or_else(|| "-".into(), |x| x.to_string())
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}
