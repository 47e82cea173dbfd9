//! Figure data: beeswarm summary, dependence scatter and single-student
//! waterfall. Payloads only reshape existing explanations; no attribution
//! is recomputed here.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::boosted_trees::logistic;
use crate::data_model::{Cohort, FeatureSpec};
use crate::error::{Error, Result};
use crate::shapley::{Explanation, GlobalImportance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    Summary,
    Dependence,
    Waterfall,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlotMetadata {
    pub model_hash: String,
    pub cohort_tag: String,
    /// Seconds since the epoch; the only field allowed to differ between
    /// otherwise identical runs.
    pub generated_at_unix: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryPoint {
    pub sample_id: String,
    pub phi: f64,
    pub feature_value: f64,
    pub feature_value_percentile: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub feature: String,
    pub rank: usize,
    pub mean_abs_phi: f64,
    pub points: Vec<SummaryPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependencePoint {
    pub sample_id: String,
    pub feature_value: f64,
    pub phi: f64,
    pub color_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceData {
    pub feature: String,
    pub color_feature: String,
    pub points: Vec<DependencePoint>,
}

/// One line of the individual-case table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterfallRow {
    pub variable: String,
    pub value: f64,
    pub display_value: String,
    pub interpretation: String,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterfallData {
    pub sample_id: String,
    pub base_value: f64,
    pub output: f64,
    pub probability: f64,
    pub rows: Vec<WaterfallRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PlotPayload {
    Summary(Vec<SummaryRow>),
    Dependence(DependenceData),
    Waterfall(WaterfallData),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotBundle {
    pub kind: PlotKind,
    pub payload: PlotPayload,
    pub metadata: PlotMetadata,
}

impl PlotBundle {
    fn new(kind: PlotKind, payload: PlotPayload, cohort: &Cohort) -> Self {
        PlotBundle {
            kind,
            payload,
            metadata: PlotMetadata {
                cohort_tag: cohort.cohort_tag.clone(),
                ..PlotMetadata::default()
            },
        }
    }

    pub fn with_metadata(mut self, model_hash: &str, generated_at_unix: u64) -> Self {
        self.metadata.model_hash = model_hash.to_string();
        self.metadata.generated_at_unix = generated_at_unix;
        self
    }

    pub fn to_svg(&self) -> String {
        match &self.payload {
            PlotPayload::Summary(rows) => summary_svg(rows),
            PlotPayload::Dependence(d) => dependence_svg(d),
            PlotPayload::Waterfall(w) => waterfall_svg(w),
        }
    }
}

/// Share of the other cohort members strictly below `value`.
pub fn percentile(column: &[f64], value: f64) -> f64 {
    if column.len() < 2 {
        return 0.0;
    }
    column.iter().filter(|&&v| v < value).count() as f64 / (column.len() - 1) as f64
}

fn unknown_feature(cohort: &Cohort, name: &str) -> Error {
    Error::UnknownFeature {
        name: name.to_string(),
        valid: cohort.feature_names().join(", "),
    }
}

fn rows_for_ids<'a>(cohort: &'a Cohort, ids: &[String]) -> Result<Vec<&'a [f64]>> {
    ids.iter()
        .map(|id| {
            cohort
                .row(id)
                .map(|r| r.features.as_slice())
                .ok_or_else(|| Error::NotFound(format!("sample {id} is not in the cohort")))
        })
        .collect()
}

pub fn summary_plot_data(importance: &GlobalImportance, cohort: &Cohort, top_k: usize) -> Result<PlotBundle> {
    if importance.ranking.is_empty() || importance.per_sample.is_empty() {
        return Err(Error::Domain("summary plot of an empty importance table".into()));
    }
    if top_k == 0 || top_k > importance.ranking.len() {
        return Err(Error::Config(format!(
            "top_k must lie in 1..={}, got {top_k}",
            importance.ranking.len()
        )));
    }
    if importance.feature_names != cohort.feature_names() {
        return Err(Error::Schema("importance table and cohort list different features".into()));
    }
    let rows = rows_for_ids(cohort, &importance.sample_ids)?;
    let mut out = Vec::with_capacity(top_k);
    for (rank, &(f, mean_abs)) in importance.top(top_k).iter().enumerate() {
        let column: Vec<f64> = rows.iter().map(|r| r[f]).collect();
        let points = importance
            .sample_ids
            .iter()
            .zip(&importance.per_sample)
            .zip(&column)
            .map(|((id, phi), &v)| SummaryPoint {
                sample_id: id.clone(),
                phi: phi[f],
                feature_value: v,
                feature_value_percentile: percentile(&column, v),
            })
            .collect();
        out.push(SummaryRow {
            feature: importance.feature_names[f].clone(),
            rank: rank + 1,
            mean_abs_phi: mean_abs,
            points,
        });
    }
    Ok(PlotBundle::new(PlotKind::Summary, PlotPayload::Summary(out), cohort))
}

pub fn dependence_plot_data(
    feature: &str,
    color_feature: &str,
    explanations: &[Explanation],
    cohort: &Cohort,
) -> Result<PlotBundle> {
    let f = cohort
        .schema
        .active_index(feature)
        .ok_or_else(|| unknown_feature(cohort, feature))?;
    let c = cohort
        .schema
        .active_index(color_feature)
        .ok_or_else(|| unknown_feature(cohort, color_feature))?;
    if explanations.is_empty() {
        return Err(Error::Domain("dependence plot without explanations".into()));
    }
    let ids: Vec<String> = explanations.iter().map(|e| e.sample_id.clone()).collect();
    let rows = rows_for_ids(cohort, &ids)?;
    let mut points = Vec::with_capacity(explanations.len());
    for (e, row) in explanations.iter().zip(rows) {
        if e.phi.len() != row.len() {
            return Err(Error::Dimension {
                expected: row.len(),
                got: e.phi.len(),
            });
        }
        points.push(DependencePoint {
            sample_id: e.sample_id.clone(),
            feature_value: row[f],
            phi: e.phi[f],
            color_value: row[c],
        });
    }
    let data = DependenceData {
        feature: feature.to_string(),
        color_feature: color_feature.to_string(),
        points,
    };
    Ok(PlotBundle::new(PlotKind::Dependence, PlotPayload::Dependence(data), cohort))
}

/// Table text for one feature value.
pub fn interpret(spec: &FeatureSpec, value: f64, percentile: f64) -> String {
    if let Some(i) = spec.category_index(value) {
        if let Some(note) = spec.category_notes.get(i) {
            return note.clone();
        }
    }
    let label = spec.format_value(value);
    match &spec.interpretation {
        Some(t) => t
            .replace("{value}", &label)
            .replace("{label}", &label)
            .replace("{percentile}", &format!("{:.1}", 100.0 * percentile)),
        None if spec.description.is_empty() => format!("{} = {label}", spec.name),
        None => format!("{}: {label}", spec.description),
    }
}

pub fn waterfall_data(explanation: &Explanation, cohort: &Cohort) -> Result<PlotBundle> {
    let row = cohort
        .row(&explanation.sample_id)
        .ok_or_else(|| Error::NotFound(format!("sample {} is not in the cohort", explanation.sample_id)))?;
    if explanation.phi.len() != row.features.len() {
        return Err(Error::Dimension {
            expected: row.features.len(),
            got: explanation.phi.len(),
        });
    }
    let specs: Vec<&FeatureSpec> = cohort.schema.active_specs().collect();
    let mut order: Vec<usize> = (0..specs.len()).collect();
    order.sort_by(|&a, &b| {
        explanation.phi[b]
            .abs()
            .total_cmp(&explanation.phi[a].abs())
            .then(a.cmp(&b))
    });
    let rows = order
        .into_iter()
        .map(|f| {
            let spec = specs[f];
            let value = row.features[f];
            let column: Vec<f64> = cohort.rows.iter().map(|r| r.features[f]).collect();
            WaterfallRow {
                variable: spec.name.clone(),
                value,
                display_value: spec.format_value(value),
                interpretation: interpret(spec, value, percentile(&column, value)),
                contribution: explanation.phi[f],
            }
        })
        .collect();
    let data = WaterfallData {
        sample_id: explanation.sample_id.clone(),
        base_value: explanation.base_value,
        output: explanation.output,
        probability: logistic(explanation.output),
        rows,
    };
    Ok(PlotBundle::new(PlotKind::Waterfall, PlotPayload::Waterfall(data), cohort))
}

// ---- SVG -------------------------------------------------------------

const WIDTH: f64 = 720.0;
const MARGIN_LEFT: f64 = 150.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 30.0;
const ROW_HEIGHT: f64 = 28.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Blue for low, red for high.
fn colour(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.5 };
    let r = (30.0 + 225.0 * t).round() as u8;
    let b = (255.0 - 225.0 * t).round() as u8;
    format!("#{r:02x}50{b:02x}")
}

/// Deterministic offset in [-0.5, 0.5) for the i-th point.
fn jitter(i: usize) -> f64 {
    ((i as u64).wrapping_mul(2_654_435_761) % 1000) as f64 / 1000.0 - 0.5
}

struct Axis {
    lo: f64,
    hi: f64,
    x0: f64,
    x1: f64,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, x0: f64, x1: f64, include_zero: bool) -> Self {
        let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if include_zero {
            lo = lo.min(0.0);
            hi = hi.max(0.0);
        }
        if !lo.is_finite() || !hi.is_finite() {
            lo = -1.0;
            hi = 1.0;
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        Axis { lo, hi, x0, x1 }
    }

    fn map(&self, v: f64) -> f64 {
        self.x0 + (v - self.lo) / (self.hi - self.lo) * (self.x1 - self.x0)
    }
}

fn open(svg: &mut String, height: f64, title: &str) {
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<text x="{}" y="18" text-anchor="middle" font-size="13">{}</text>"#, WIDTH / 2.0, escape(title));
}

fn summary_svg(rows: &[SummaryRow]) -> String {
    let height = MARGIN_TOP + ROW_HEIGHT * rows.len() as f64 + 40.0;
    let axis = Axis::new(
        rows.iter().flat_map(|r| r.points.iter().map(|p| p.phi)),
        MARGIN_LEFT,
        WIDTH - MARGIN_RIGHT,
        true,
    );
    let mut svg = String::new();
    open(&mut svg, height, "Shapley values (red = high feature value)");
    let zero = axis.map(0.0);
    let bottom = height - 40.0;
    let _ = writeln!(svg, r##"<line x1="{zero:.2}" y1="{MARGIN_TOP}" x2="{zero:.2}" y2="{bottom:.2}" stroke="#999"/>"##);
    for (k, row) in rows.iter().enumerate() {
        let y = MARGIN_TOP + ROW_HEIGHT * (k as f64 + 0.5);
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN_LEFT - 8.0,
            y + 4.0,
            escape(&row.feature)
        );
        for (i, p) in row.points.iter().enumerate() {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{}" fill-opacity="0.8"/>"#,
                axis.map(p.phi),
                y + jitter(i) * ROW_HEIGHT * 0.7,
                colour(p.feature_value_percentile)
            );
        }
    }
    axis_labels(&mut svg, &axis, bottom, "Shapley value (log-odds)");
    svg.push_str("</svg>\n");
    svg
}

fn axis_labels(svg: &mut String, axis: &Axis, y: f64, label: &str) {
    let _ = writeln!(svg, r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#333"/>"##, axis.x0, axis.x1);
    for k in 0..=4 {
        let v = axis.lo + (axis.hi - axis.lo) * k as f64 / 4.0;
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{v:.3}</text>"#, axis.map(v), y + 14.0);
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (axis.x0 + axis.x1) / 2.0,
        y + 30.0,
        escape(label)
    );
}

fn dependence_svg(d: &DependenceData) -> String {
    let height = 420.0;
    let (top, bottom) = (MARGIN_TOP + 10.0, height - 50.0);
    let x = Axis::new(d.points.iter().map(|p| p.feature_value), 70.0, WIDTH - MARGIN_RIGHT, false);
    let y = Axis::new(d.points.iter().map(|p| p.phi), bottom, top, true);
    let colours: Vec<f64> = d.points.iter().map(|p| p.color_value).collect();
    let mut svg = String::new();
    open(
        &mut svg,
        height,
        &format!("Dependence of {} (colour: {})", d.feature, d.color_feature),
    );
    let zero = y.map(0.0);
    let _ = writeln!(svg, r##"<line x1="{:.2}" y1="{zero:.2}" x2="{:.2}" y2="{zero:.2}" stroke="#999"/>"##, x.x0, x.x1);
    for p in &d.points {
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}" fill-opacity="0.8"/>"#,
            x.map(p.feature_value),
            y.map(p.phi),
            colour(percentile(&colours, p.color_value))
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" transform="rotate(-90 16 {:.2})" text-anchor="middle">Shapley value of {}</text>"#,
        (top + bottom) / 2.0,
        (top + bottom) / 2.0,
        escape(&d.feature)
    );
    axis_labels(&mut svg, &x, bottom, &d.feature);
    svg.push_str("</svg>\n");
    svg
}

fn waterfall_svg(w: &WaterfallData) -> String {
    let height = MARGIN_TOP + ROW_HEIGHT * (w.rows.len() as f64 + 1.0) + 40.0;
    let mut running = w.base_value;
    let mut ends = vec![running];
    for r in &w.rows {
        running += r.contribution;
        ends.push(running);
    }
    let axis = Axis::new(ends.iter().copied(), MARGIN_LEFT, WIDTH - MARGIN_RIGHT - 60.0, false);
    let mut svg = String::new();
    open(
        &mut svg,
        height,
        &format!("Student {}: f(x) = {:.3} (p = {:.3})", w.sample_id, w.output, w.probability),
    );
    let mut start = w.base_value;
    for (k, r) in w.rows.iter().enumerate() {
        let y = MARGIN_TOP + ROW_HEIGHT * k as f64;
        let end = start + r.contribution;
        let (a, b) = (axis.map(start.min(end)), axis.map(start.max(end)));
        let fill = if r.contribution >= 0.0 { "#d1495b" } else { "#2e86ab" };
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{} = {}</text>"#,
            MARGIN_LEFT - 8.0,
            y + ROW_HEIGHT * 0.6,
            escape(&r.variable),
            escape(&r.display_value)
        );
        let _ = writeln!(
            svg,
            r#"<rect x="{a:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
            y + 4.0,
            (b - a).max(0.5),
            ROW_HEIGHT - 8.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}">{:+.3}</text>"#,
            b + 4.0,
            y + ROW_HEIGHT * 0.6,
            r.contribution
        );
        start = end;
    }
    let bottom = MARGIN_TOP + ROW_HEIGHT * w.rows.len() as f64 + 4.0;
    let base = axis.map(w.base_value);
    let _ = writeln!(
        svg,
        r##"<line x1="{base:.2}" y1="{MARGIN_TOP}" x2="{base:.2}" y2="{bottom:.2}" stroke="#999" stroke-dasharray="3,3"/>"##
    );
    axis_labels(&mut svg, &axis, bottom + ROW_HEIGHT, &format!("E[f(x)] = {:.3}", w.base_value));
    svg.push_str("</svg>\n");
    svg
}
