//! Human-readable tables and CSV output for each subcommand.

use std::fmt::Write;

use propor::{
    candidate_acts, fmt_num, total_utility, write_results, EpisodeTrace, ModelVariant, ResultRows,
    Scenario, SelectionResult, SpeechAct, SweepAxis, SweepRow, UtilityBreakdown,
};

use crate::Format;

/// Left-aligned first column, right-aligned numbers.
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn render(&self, out: &mut String) {
        let widths: Vec<usize> = (0..self.header.len())
            .map(|c| {
                self.rows
                    .iter()
                    .map(|r| r[c].len())
                    .chain([self.header[c].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        for row in std::iter::once(&self.header).chain(&self.rows) {
            let mut line = String::new();
            for (c, cell) in row.iter().enumerate() {
                if c > 0 {
                    line.push_str("  ");
                }
                if c == 0 {
                    let _ = write!(line, "{cell:<w$}", w = widths[c]);
                } else {
                    let _ = write!(line, "{cell:>w$}", w = widths[c]);
                }
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
    }
}

fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for row in rows {
        w.write_record(row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("UTF-8 fields")
}

fn strategy_name(act: &SpeechAct) -> String {
    act.strategy()
        .map_or_else(|| "silence".to_string(), |s| s.name().to_string())
}

fn conveyed(act: &SpeechAct) -> String {
    act.conveyed_severity()
        .map_or_else(|| "-".to_string(), |s| fmt_num(s.value()))
}

fn conveyed_csv(act: &SpeechAct) -> String {
    act.conveyed_severity()
        .map_or_else(String::new, |s| fmt_num(s.value()))
}

fn explain(out: &mut String, scenario: &Scenario, act: &SpeechAct, b: &UtilityBreakdown) {
    let _ = writeln!(
        out,
        "act: {} conveyed={} face_threat={}",
        strategy_name(act),
        conveyed(act),
        fmt_num(b.face_threat)
    );
    let _ = writeln!(
        out,
        "utility: moral={} social={} total={}",
        fmt_num(b.moral),
        fmt_num(b.social),
        fmt_num(b.total)
    );
    if b.discount_factor != 1.0 || b.shame_bonus != 0.0 {
        let _ = writeln!(
            out,
            "audience discount factor={} shame bonus={}",
            fmt_num(b.discount_factor),
            fmt_num(b.shame_bonus)
        );
    }
    if b.per_observer.is_empty() {
        return;
    }
    out.push_str("\nper-observer contributions:\n");
    let mut table = Table::new(&[
        "observer",
        "role",
        "perceived",
        "importance",
        "moral",
        "social",
        "self_advocacy",
    ]);
    for c in &b.per_observer {
        let observer = scenario
            .observers()
            .iter()
            .find(|o| o.id() == c.observer_id)
            .expect("breakdown rows name scenario observers");
        table.push(vec![
            c.observer_id.clone(),
            observer.role().name().to_string(),
            fmt_num(observer.perceived_severity().value()),
            fmt_num(observer.importance()),
            fmt_num(c.moral_contribution),
            fmt_num(c.social_contribution),
            fmt_num(c.self_advocacy_penalty),
        ]);
    }
    table.render(out);
}

const ACT_COLUMNS: [&str; 6] = [
    "strategy",
    "conveyed_severity",
    "face_threat",
    "moral",
    "social",
    "total",
];

pub(crate) fn evaluate(
    scenario: &Scenario,
    act: Option<&SpeechAct>,
    variant: ModelVariant,
    format: Format,
) -> String {
    let acts: Vec<SpeechAct> = match act {
        Some(act) => vec![*act],
        None => candidate_acts(scenario).acts().to_vec(),
    };
    let scored: Vec<(SpeechAct, UtilityBreakdown)> = acts
        .into_iter()
        .map(|a| (a, total_utility(scenario, &a, variant)))
        .collect();

    match format {
        Format::Csv => {
            let rows: Vec<Vec<String>> = scored
                .iter()
                .map(|(a, b)| {
                    vec![
                        strategy_name(a),
                        conveyed_csv(a),
                        fmt_num(b.face_threat),
                        fmt_num(b.moral),
                        fmt_num(b.social),
                        fmt_num(b.total),
                    ]
                })
                .collect();
            csv(&ACT_COLUMNS, &rows)
        }
        Format::Table if scored.len() == 1 => {
            let mut out = String::new();
            explain(&mut out, scenario, &scored[0].0, &scored[0].1);
            out
        }
        Format::Table => {
            let mut table = Table::new(&ACT_COLUMNS);
            for (a, b) in &scored {
                table.push(vec![
                    strategy_name(a),
                    conveyed(a),
                    fmt_num(b.face_threat),
                    fmt_num(b.moral),
                    fmt_num(b.social),
                    fmt_num(b.total),
                ]);
            }
            let mut out = String::new();
            table.render(&mut out);
            out
        }
    }
}

pub(crate) fn select(scenario: &Scenario, result: &SelectionResult, format: Format) -> String {
    let ranked_rows: Vec<Vec<String>> = result
        .ranked
        .iter()
        .enumerate()
        .map(|(i, r)| {
            vec![
                (i + 1).to_string(),
                strategy_name(&r.act),
                conveyed(&r.act),
                fmt_num(r.face_threat),
                fmt_num(r.total),
            ]
        })
        .collect();
    let header = [
        "rank",
        "strategy",
        "conveyed_severity",
        "face_threat",
        "total",
    ];

    match format {
        Format::Csv => {
            let rows: Vec<Vec<String>> = result
                .ranked
                .iter()
                .zip(ranked_rows)
                .map(|(r, mut row)| {
                    row[2] = conveyed_csv(&r.act);
                    row
                })
                .collect();
            csv(&header, &rows)
        }
        Format::Table => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "chosen: {} {}",
                strategy_name(&result.chosen),
                conveyed(&result.chosen)
            );
            let _ = writeln!(out, "total: {}\n", fmt_num(result.breakdown.total));
            explain(&mut out, scenario, &result.chosen, &result.breakdown);
            out.push_str("\nranked candidates:\n");
            let mut table = Table::new(&header);
            for row in ranked_rows {
                table.push(row);
            }
            table.render(&mut out);
            out
        }
    }
}

pub(crate) fn sweep(axis: SweepAxis, rows: &[SweepRow], format: Format) -> String {
    match format {
        Format::Csv => write_results(ResultRows::Sweep(rows)),
        Format::Table => {
            let mut out = String::new();
            let _ = writeln!(out, "sweep over {axis}");
            let mut table = Table::new(&propor::scenario_io::SWEEP_COLUMNS);
            for row in rows {
                let b = &row.breakdown;
                table.push(vec![
                    fmt_num(row.axis_value),
                    strategy_name(&row.chosen),
                    conveyed(&row.chosen),
                    fmt_num(b.face_threat),
                    fmt_num(b.moral),
                    fmt_num(b.social),
                    fmt_num(b.total),
                ]);
            }
            table.render(&mut out);
            out
        }
    }
}

pub(crate) fn simulate(trace: &EpisodeTrace, format: Format) -> String {
    match format {
        Format::Csv => write_results(ResultRows::Episode(trace)),
        Format::Table => {
            let mut out = String::new();
            let ids: Vec<&String> = trace
                .rounds
                .first()
                .map(|r| r.beliefs.keys().collect())
                .unwrap_or_default();
            let mut header = vec![
                "round",
                "norm",
                "actual",
                "strategy",
                "conveyed",
                "face_threat",
                "total",
            ];
            let belief_headers: Vec<String> = ids.iter().map(|id| format!("belief:{id}")).collect();
            header.extend(belief_headers.iter().map(String::as_str));
            let mut table = Table::new(&header);
            for (i, r) in trace.rounds.iter().enumerate() {
                let mut row = vec![
                    (i + 1).to_string(),
                    r.violation.norm_id.clone(),
                    fmt_num(r.violation.actual_severity.value()),
                    strategy_name(&r.act),
                    conveyed(&r.act),
                    fmt_num(r.face_threat),
                    fmt_num(r.breakdown.total),
                ];
                row.extend(ids.iter().map(|id| fmt_num(r.beliefs[*id].value())));
                table.push(row);
            }
            table.render(&mut out);
            let s = &trace.summary;
            let _ = writeln!(
                out,
                "\nmean belief error: {}\ncumulative face threat: {}\ncumulative honesty gap: {}",
                fmt_num(s.mean_belief_error),
                fmt_num(s.cumulative_face_threat),
                fmt_num(s.cumulative_honesty_gap)
            );
            out
        }
    }
}
