//! Aligned-text renderings for `--format text`.

use std::fmt::Write;

use arcsmith_core::count::PointCount;
use arcsmith_core::graph::{intersection_matrix, DualGraph, MatchReport, MinimalModel};
use arcsmith_core::harness::wedge::WedgeReport;
use arcsmith_core::harness::ExperimentReport;
use arcsmith_core::jet::{JetStatistics, JetSystem};

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let line = |cells: Vec<&str>, out: &mut String| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(header.to_vec(), &mut out);
    for r in rows {
        line(r.iter().map(String::as_str).collect(), &mut out);
    }
    out
}

fn stats_line(s: &JetStatistics) -> String {
    format!(
        "level {}: {} variables, {} equations ({} nonzero), max degree {}, {} terms",
        s.level, s.variables, s.equations, s.nonzero_equations, s.max_degree, s.total_terms
    )
}

pub fn jet(stats: &JetStatistics, equations: &[Vec<String>], js: &JetSystem) -> String {
    let mut out = format!("{} over {}\n", stats_line(stats), js.ring());
    for (j, row) in equations.iter().enumerate() {
        for (q, e) in row.iter().enumerate() {
            let _ = writeln!(out, "F_{},{} = {e}", j + 1, q + 1);
        }
    }
    out
}

pub fn fiber(ring: &str, relations: &[String], stats: Option<&JetStatistics>) -> String {
    let mut out = format!("over {ring}\n");
    for r in relations {
        let _ = writeln!(out, "  {r} = 0");
    }
    if let Some(s) = stats {
        let _ = writeln!(out, "{}", stats_line(s));
    }
    out
}

fn count_row(pc: &PointCount) -> Vec<String> {
    match pc {
        PointCount::Exact { q, level, count } => {
            vec![
                q.to_string(),
                level.to_string(),
                count.to_string(),
                "exact".into(),
            ]
        }
        PointCount::Estimate {
            q,
            level,
            estimate,
            ci_low,
            ci_high,
            ..
        } => vec![
            q.to_string(),
            level.to_string(),
            format!("{estimate:.1}"),
            format!("95% CI [{ci_low:.1}, {ci_high:.1}] (heuristic)"),
        ],
    }
}

pub fn count(pc: &PointCount) -> String {
    table(&["q", "level", "count", "kind"], &[count_row(pc)])
}

fn matrix(g: &DualGraph) -> String {
    let m = intersection_matrix(g);
    let rows: Vec<Vec<String>> = m
        .ids
        .iter()
        .zip(&m.entries)
        .map(|(id, r)| {
            let mut row = vec![format!("E{id}")];
            row.extend(r.iter().map(i64::to_string));
            row
        })
        .collect();
    let header: Vec<String> = std::iter::once(String::new())
        .chain(m.ids.iter().map(|i| format!("E{i}")))
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    table(&header, &rows)
}

pub fn minimal(g: &DualGraph, mm: &MinimalModel) -> String {
    let mut out = format!("input ({} curves)\n{}", g.len(), matrix(g));
    let _ = writeln!(out, "contracted: {:?}", mm.contracted);
    let _ = writeln!(
        out,
        "minimal model ({} curves, N_r = {})",
        mm.graph.len(),
        mm.graph.len()
    );
    if !mm.graph.is_empty() {
        out.push_str(&matrix(&mm.graph));
    }
    out
}

pub fn matching(r: &MatchReport) -> String {
    match &r.bijection {
        Some(b) => {
            let pairs: Vec<String> = b.iter().map(|(x, y)| format!("{x}->{y}")).collect();
            format!(
                "match: {}\nN_r: {} and {}\nessential status agrees: {}\n",
                pairs.join(", "),
                r.n_r_first,
                r.n_r_second,
                r.essential_status_agrees.unwrap_or(false)
            )
        }
        None => format!("no match\nN_r: {} and {}\n", r.n_r_first, r.n_r_second),
    }
}

pub fn wedge(r: &WedgeReport) -> String {
    let mut out = format!(
        "arc {} over {} in frame {}\nwedge {}\nu = 0 gives {} (round trip {})\n",
        r.arc,
        r.field,
        r.frame,
        r.wedge,
        r.specialization,
        if r.round_trip { "ok" } else { "FAILED" }
    );
    let _ = writeln!(
        out,
        "leaves the special fiber: {}{}",
        r.witness.holds,
        r.witness
            .certificate
            .as_ref()
            .map(|c| format!(" (lowest term {c})"))
            .unwrap_or_default()
    );
    if let Some(img) = &r.image {
        let _ = writeln!(out, "image on the surface {img}");
    }
    out
}

pub fn report(r: &ExperimentReport) -> String {
    let mut out = format!(
        "{} over {} (sha256 {})\n",
        r.input.name,
        r.input.ring,
        &r.input.sha256[..12]
    );
    if let Some(j) = &r.jet {
        for l in &j.levels {
            let _ = writeln!(out, "{}", stats_line(&l.statistics));
        }
    }
    if let Some(c) = &r.counts {
        let rows: Vec<Vec<String>> = c
            .entries
            .iter()
            .map(|e| match (&e.result, &e.skipped) {
                (Some(pc), _) => count_row(pc),
                (None, skipped) => vec![
                    e.q.to_string(),
                    e.level.to_string(),
                    "-".into(),
                    skipped.clone().unwrap_or_default(),
                ],
            })
            .collect();
        out.push_str(&table(&["q", "level", "count", "kind"], &rows));
    }
    if let Some(g) = &r.graphs {
        let nr = |s: &Option<arcsmith_core::harness::pipeline::GraphSummary>| {
            s.as_ref().map_or("-".to_string(), |s| s.n_r.to_string())
        };
        let _ = writeln!(
            out,
            "N_r special {}, generic {}",
            nr(&g.special),
            nr(&g.generic)
        );
        if let Some(c) = &g.comparison {
            let _ = writeln!(out, "graphs match: {}", c.matched);
        }
    }
    if let Some(c) = &r.condition_no {
        let _ = writeln!(
            out,
            "lifts at level {} over {}: {}/{} ({})",
            c.level, c.field, c.lifted, c.attempted, c.label
        );
    }
    if let Some(i) = &r.intersections {
        for e in &i.entries {
            let v = e
                .result
                .value()
                .map_or("not isolated".to_string(), |v| v.to_string());
            let _ = writeln!(out, "intersection {}: {v}", e.label);
        }
    }
    let _ = writeln!(
        out,
        "certifications: {} passed, {} failed",
        r.certifications.passed, r.certifications.failed
    );
    for e in &r.task_errors {
        let _ = writeln!(out, "task {} failed: {}", e.task, e.message);
    }
    out
}
