//! Cohort schema, CSV ingestion and label derivation.
//!
//! Categorical variables are stored as ordinal codes: the zero-based index of
//! the label in its declared category list, shifted by the spec's `code_base`
//! (seat position is coded 1/2/3, most other variables from 0).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json;

pub const ID_COLUMN: &str = "student_id";
pub const GPA_COLUMN: &str = "GPA";
pub const LABEL_COLUMN: &str = "Risk";

/// GPA below this value earns an academic-risk warning.
pub const RISK_GPA_THRESHOLD: f64 = 2.0;
pub const GPA_MAX: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
    #[serde(default)]
    pub categories: Vec<String>,
    /// Code assigned to the first category.
    #[serde(default)]
    pub code_base: i64,
    #[serde(default)]
    pub pruned: bool,
    /// Filled by the interaction-network stage rather than read from input.
    #[serde(default)]
    pub derived: bool,
    #[serde(default)]
    pub description: String,
    /// Display template for explanations. Placeholders: `{value}`,
    /// `{label}`, `{percentile}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interpretation: Option<String>,
    /// Per-category display text, aligned with `categories`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub category_notes: Vec<String>,
}

impl FeatureSpec {
    pub fn numeric(name: &str, description: &str) -> Self {
        FeatureSpec {
            name: name.to_string(),
            kind: FeatureKind::Numeric,
            categories: Vec::new(),
            code_base: 0,
            pruned: false,
            derived: false,
            description: description.to_string(),
            interpretation: None,
            category_notes: Vec::new(),
        }
    }

    pub fn categorical(name: &str, description: &str, categories: &[&str]) -> Self {
        FeatureSpec {
            kind: FeatureKind::Categorical,
            categories: categories.iter().map(|c| c.to_string()).collect(),
            ..FeatureSpec::numeric(name, description)
        }
    }

    fn with_code_base(mut self, base: i64) -> Self {
        self.code_base = base;
        self
    }

    fn derived(mut self) -> Self {
        self.derived = true;
        self
    }

    fn interpreted(mut self, template: &str) -> Self {
        self.interpretation = Some(template.to_string());
        self
    }

    fn notes(mut self, notes: &[&str]) -> Self {
        self.category_notes = notes.iter().map(|c| c.to_string()).collect();
        self
    }

    pub fn is_categorical(&self) -> bool {
        self.kind == FeatureKind::Categorical
    }

    /// Encodes a raw cell. Categorical labels match case-insensitively.
    pub fn encode(&self, raw: &str) -> std::result::Result<f64, String> {
        let raw = raw.trim();
        match self.kind {
            FeatureKind::Numeric => {
                let v: f64 = raw
                    .parse()
                    .map_err(|_| format!("cannot parse {raw:?} as a number"))?;
                if !v.is_finite() {
                    return Err(format!("non-finite value {raw:?}"));
                }
                Ok(v)
            }
            FeatureKind::Categorical => self
                .categories
                .iter()
                .position(|c| c.eq_ignore_ascii_case(raw))
                .map(|i| (self.code_base + i as i64) as f64)
                .ok_or_else(|| {
                    format!(
                        "unknown category {raw:?} (expected one of {})",
                        self.categories.join(", ")
                    )
                }),
        }
    }

    /// Category label for an encoded value, if this is a categorical spec
    /// and the code is valid.
    pub fn decode(&self, code: f64) -> Option<&str> {
        self.category_index(code).map(|i| self.categories[i].as_str())
    }

    pub fn category_index(&self, code: f64) -> Option<usize> {
        if !self.is_categorical() || code.fract() != 0.0 {
            return None;
        }
        let idx = code as i64 - self.code_base;
        (idx >= 0 && (idx as usize) < self.categories.len()).then_some(idx as usize)
    }

    /// Text used for CSV output: the label for categoricals, the shortest
    /// round-tripping decimal for numerics.
    pub fn format_value(&self, value: f64) -> String {
        match self.decode(value) {
            Some(label) => label.to_string(),
            None => format!("{value}"),
        }
    }

    pub fn is_valid_encoded(&self, value: f64) -> bool {
        match self.kind {
            FeatureKind::Numeric => value.is_finite(),
            FeatureKind::Categorical => self.category_index(value).is_some(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self.kind {
            FeatureKind::Categorical if self.categories.len() < 2 => Err(Error::Schema(format!(
                "categorical feature {} needs at least 2 categories",
                self.name
            ))),
            FeatureKind::Numeric if !self.categories.is_empty() => Err(Error::Schema(format!(
                "numeric feature {} must not declare categories",
                self.name
            ))),
            _ => Ok(()),
        }
    }
}

/// Ordered list of feature specs for one cohort format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub specs: Vec<FeatureSpec>,
    #[serde(default = "default_label_name")]
    pub label_name: String,
}

fn default_label_name() -> String {
    "GPA-derived risk".to_string()
}

const NEVER_TO_ALWAYS: [&str; 4] = ["never", "seldom", "often", "always"];
const NO_YES: [&str; 2] = ["no", "yes"];

impl Default for FeatureSchema {
    fn default() -> Self {
        FeatureSchema::standard()
    }
}

impl FeatureSchema {
    pub fn new(specs: Vec<FeatureSpec>) -> Result<Self> {
        let schema = FeatureSchema {
            specs,
            label_name: default_label_name(),
        };
        schema.validate()?;
        Ok(schema)
    }

    /// The 36-variable student schema: 8 numeric and 28 categorical
    /// variables, with the 10 low-value variables marked as pruned.
    pub fn standard() -> Self {
        use FeatureSpec as F;
        let ages = ["16", "17", "18", "19", "20", "21", "22", "23", "24"];
        let provinces = [
            "Liaoning", "Beijing", "Heilongjiang", "Jilin", "Hebei", "Shandong", "Henan",
            "Shanxi", "Inner Mongolia", "Tianjin", "Jiangsu", "Zhejiang", "Anhui", "Hubei",
            "Hunan", "Sichuan", "Guangdong", "Fujian", "Yunnan",
        ];
        let ethnicities = [
            "Han", "Manchu", "Mongolian", "Hui", "Korean", "Xibe", "Zhuang", "Other",
        ];
        let horoscopes = [
            "Aries", "Taurus", "Gemini", "Cancer", "Leo", "Virgo", "Libra", "Scorpio",
            "Sagittarius", "Capricorn", "Aquarius", "Pisces",
        ];
        let dorms: Vec<String> = (1..=103).map(|i| format!("D{i:03}")).collect();
        let dorm_refs: Vec<&str> = dorms.iter().map(String::as_str).collect();
        let classes: Vec<String> = (1..=14).map(|i| format!("C{i:02}")).collect();
        let class_refs: Vec<&str> = classes.iter().map(String::as_str).collect();

        let specs = vec![
            F::numeric("ExmSumN", "College entrance examination total score")
                .interpreted("Total entrance score exceeds {percentile}% of classmates ({value})"),
            F::numeric("ExamCnN", "College entrance examination Chinese score")
                .interpreted("Chinese entrance score exceeds {percentile}% of classmates ({value})"),
            F::numeric("ExamEnN", "College entrance examination foreign language score")
                .interpreted("English entrance score exceeds {percentile}% of classmates ({value})"),
            F::numeric("ExamMatN", "College entrance examination maths score")
                .interpreted("Maths entrance score exceeds {percentile}% of classmates ({value})"),
            F::numeric("ExamProN", "College entrance examination professional course score")
                .interpreted("Professional course score exceeds {percentile}% of classmates ({value})"),
            F::numeric("DgrCnt", "Quantity of academic partners (degree centrality)")
                .derived()
                .interpreted("Number of learning partners exceeds {percentile}% of classmates"),
            F::numeric("BtwnCnt", "Mobility of academic partners (betweenness centrality)")
                .derived()
                .interpreted("Mobility across learning teams exceeds {percentile}% of classmates"),
            F::numeric("EgnCnt", "Quality of academic partners (eigenvector centrality)")
                .derived()
                .interpreted("Quality of learning partners exceeds {percentile}% of classmates"),
            F::categorical("EntrnceTyp", "Entrance type", &["upgrade", "common"]),
            F::categorical("Gndr", "Gender", &["male", "female"]),
            F::categorical("Age", "Age at entrance", &ages),
            F::categorical(
                "UrbnRrl",
                "Urban-rural origin",
                &["rural-fresh", "rural-former", "urban-fresh", "urban-former"],
            )
            .notes(&[
                "Came from the countryside",
                "Came from the countryside (former rural registration)",
                "Came from a city",
                "Came from a city (former urban registration)",
            ]),
            F::categorical("BrthPrvnce", "Birth province", &provinces),
            F::categorical("Eth", "Ethnicity", &ethnicities),
            F::categorical("Hrsce", "Horoscope", &horoscopes),
            F::categorical("NonRsdnt", "Non-resident", &NO_YES)
                .notes(&["Lives on campus", "Lives off campus"]),
            F::categorical("Gurdn", "Guardian type", &["parents", "father", "mother", "other"]),
            F::categorical(
                "PltclStts",
                "Politics status",
                &["masses", "league-member", "party-applicant", "party-member"],
            ),
            F::categorical("Dorm", "Dormitory code", &dorm_refs),
            F::categorical(
                "DrmStyle",
                "Dormitory study atmosphere",
                &["for-fun", "mostly-fun", "mostly-study", "for-study"],
            )
            .notes(&[
                "Very poor dormitory study atmosphere",
                "Poor dormitory study atmosphere",
                "Good dormitory study atmosphere",
                "Very good dormitory study atmosphere",
            ]),
            F::categorical("GftedStdnt", "Gifted student", &NO_YES),
            F::categorical("Class", "Class code", &class_refs),
            F::categorical("SftSp", "Soft soap", &NO_YES),
            F::categorical("Truant", "Truant level", &NEVER_TO_ALWAYS).notes(&[
                "Never skips class",
                "Seldom skips class",
                "Often skips class",
                "Always skips class",
            ]),
            F::categorical("Seat", "Seat order", &["front", "middle", "rear"])
                .with_code_base(1)
                .notes(&[
                    "Sits at the front of the classroom",
                    "Sits in the middle of the classroom",
                    "Sits at the back of the classroom",
                ]),
            F::categorical("Leader", "Student leader", &["none", "class", "school"]),
            F::categorical("Awrds", "Academic awards", &NO_YES),
            F::categorical("BkBrrw", "Book borrowing", &NEVER_TO_ALWAYS),
            F::categorical("WrkStdy", "Work study", &NO_YES),
            F::categorical("Lover", "Love amount", &["0", "1", "2", "more"]),
            F::categorical("Hair", "Hair amount", &["0", "1", "2", "3", "4"]),
            F::categorical("Tattoo", "Tattoo", &NO_YES),
            F::categorical("CmpsLn", "Campus loan", &NO_YES),
            F::categorical("Lpstck", "Lipstick addiction", &NEVER_TO_ALWAYS).notes(&[
                "Never uses lipstick",
                "Seldom uses lipstick",
                "Often uses lipstick",
                "Always uses lipstick",
            ]),
            F::categorical("Smk", "Smoke addiction", &NO_YES),
            F::categorical("Game", "Game addiction", &NEVER_TO_ALWAYS).notes(&[
                "Never plays video games",
                "Seldom plays video games",
                "Often plays video games",
                "Is addicted to video games",
            ]),
        ];
        let mut schema = FeatureSchema {
            specs,
            label_name: default_label_name(),
        };
        for name in PRUNED_BY_DEFAULT {
            if let Some(s) = schema.specs.iter_mut().find(|s| s.name == name) {
                s.pruned = true;
            }
        }
        schema
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for spec in &self.specs {
            spec.validate()?;
            if !seen.insert(spec.name.as_str()) {
                return Err(Error::Schema(format!("duplicate feature name {}", spec.name)));
            }
            for reserved in [ID_COLUMN, GPA_COLUMN, LABEL_COLUMN] {
                if spec.name == reserved {
                    return Err(Error::Schema(format!("feature name {reserved} is reserved")));
                }
            }
        }
        if self.active_specs().next().is_none() {
            return Err(Error::Schema("schema has no unpruned features".into()));
        }
        Ok(())
    }

    /// Unpruned specs, in schema order. These define the feature vector.
    pub fn active_specs(&self) -> impl Iterator<Item = &FeatureSpec> {
        self.specs.iter().filter(|s| !s.pruned)
    }

    pub fn active_names(&self) -> Vec<String> {
        self.active_specs().map(|s| s.name.clone()).collect()
    }

    pub fn active_len(&self) -> usize {
        self.active_specs().count()
    }

    /// Position of `name` in the feature vector.
    pub fn active_index(&self, name: &str) -> Option<usize> {
        self.active_specs().position(|s| s.name == name)
    }

    pub fn spec(&self, name: &str) -> Option<&FeatureSpec> {
        self.specs.iter().find(|s| s.name == name)
    }

    /// Returns a copy with the named features additionally pruned.
    pub fn without(&self, names: &[String]) -> Result<Self> {
        let mut out = self.clone();
        for name in names {
            let spec = out
                .specs
                .iter_mut()
                .find(|s| &s.name == name)
                .ok_or_else(|| Error::UnknownFeature {
                    name: name.clone(),
                    valid: self.active_names().join(", "),
                })?;
            spec.pruned = true;
        }
        out.validate()?;
        Ok(out)
    }

    pub fn hash(&self) -> Result<String> {
        json::canonical_hash(self)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let schema: FeatureSchema = json::read_json(path)?;
        schema.validate()?;
        Ok(schema)
    }
}

/// The low-impact variables dropped from the default schema.
pub const PRUNED_BY_DEFAULT: [&str; 10] = [
    "Age", "BrthPrvnce", "Eth", "Hrsce", "Gurdn", "Dorm", "Awrds", "Hair", "Tattoo", "CmpsLn",
];

/// Maps a GPA on the 0–5 scale to the binary risk label.
pub fn derive_label(gpa: f64) -> Result<u8> {
    if !(0.0..=GPA_MAX).contains(&gpa) {
        return Err(Error::Domain(format!("GPA {gpa} outside [0, 5]")));
    }
    Ok(u8::from(gpa < RISK_GPA_THRESHOLD))
}

pub fn encode_value(raw: &str, spec: &FeatureSpec) -> std::result::Result<f64, String> {
    spec.encode(raw)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortRow {
    pub student_id: String,
    pub features: Vec<f64>,
    pub label: u8,
}

/// Encoded feature matrix plus labels for one grade group.
#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    pub schema: FeatureSchema,
    pub rows: Vec<CohortRow>,
    pub cohort_tag: String,
}

/// On-disk form of a cohort: the schema travels as its hash only.
#[derive(Debug, Serialize, Deserialize)]
struct CohortFile {
    schema_hash: String,
    cohort_tag: String,
    features: Vec<String>,
    rows: Vec<CohortRow>,
}

impl Cohort {
    pub fn new(schema: FeatureSchema, rows: Vec<CohortRow>, cohort_tag: &str) -> Result<Self> {
        let cohort = Cohort {
            schema,
            rows,
            cohort_tag: cohort_tag.to_string(),
        };
        cohort.validate()?;
        Ok(cohort)
    }

    pub fn validate(&self) -> Result<()> {
        let specs: Vec<&FeatureSpec> = self.schema.active_specs().collect();
        let mut ids = BTreeSet::new();
        for (r, row) in self.rows.iter().enumerate() {
            if row.features.len() != specs.len() {
                return Err(Error::Dimension {
                    expected: specs.len(),
                    got: row.features.len(),
                });
            }
            if row.label > 1 {
                return Err(Error::Domain(format!("row {r}: label {} is not 0/1", row.label)));
            }
            if !ids.insert(row.student_id.as_str()) {
                return Err(Error::Domain(format!("duplicate student id {}", row.student_id)));
            }
            for (spec, &v) in specs.iter().zip(&row.features) {
                if !spec.is_valid_encoded(v) {
                    return Err(Error::Ingest {
                        row: r + 1,
                        column: spec.name.clone(),
                        reason: format!("invalid encoded value {v}"),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.schema.active_names()
    }

    pub fn n_features(&self) -> usize {
        self.schema.active_len()
    }

    pub fn features(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.features.clone()).collect()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.rows.iter().map(|r| r.label).collect()
    }

    pub fn ids(&self) -> Vec<String> {
        self.rows.iter().map(|r| r.student_id.clone()).collect()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.schema.active_index(name)?;
        Some(self.rows.iter().map(|r| r.features[j]).collect())
    }

    pub fn row(&self, student_id: &str) -> Option<&CohortRow> {
        self.rows.iter().find(|r| r.student_id == student_id)
    }

    /// Keeps the listed rows in the given order.
    pub fn subset(&self, indices: &[usize]) -> Cohort {
        Cohort {
            schema: self.schema.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            cohort_tag: self.cohort_tag.clone(),
        }
    }

    /// Re-expresses the cohort under a schema that prunes additional columns.
    pub fn project(&self, schema: &FeatureSchema) -> Result<Cohort> {
        let src = self.feature_names();
        let mut map = Vec::new();
        for name in schema.active_names() {
            let j = src.iter().position(|s| *s == name).ok_or_else(|| {
                Error::Schema(format!("feature {name} is not present in the cohort"))
            })?;
            map.push(j);
        }
        let rows = self
            .rows
            .iter()
            .map(|r| CohortRow {
                student_id: r.student_id.clone(),
                features: map.iter().map(|&j| r.features[j]).collect(),
                label: r.label,
            })
            .collect();
        Cohort::new(schema.clone(), rows, &self.cohort_tag)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = CohortFile {
            schema_hash: self.schema.hash()?,
            cohort_tag: self.cohort_tag.clone(),
            features: self.feature_names(),
            rows: self.rows.clone(),
        };
        json::to_canonical_string(&file)
    }

    pub fn from_json(text: &str, schema: &FeatureSchema) -> Result<Cohort> {
        let file: CohortFile = serde_json::from_str(text)?;
        let expected = schema.hash()?;
        if file.schema_hash != expected {
            return Err(Error::Schema(format!(
                "schema mismatch: cohort was written with schema {} but {} was supplied",
                file.schema_hash, expected
            )));
        }
        if file.features != schema.active_names() {
            return Err(Error::Schema("feature list does not match schema".into()));
        }
        Cohort::new(schema.clone(), file.rows, &file.cohort_tag)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>, schema: &FeatureSchema) -> Result<Cohort> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Cohort::from_json(&text, schema)
    }

    /// Writes the cohort in the ingestible CSV layout, with a precomputed
    /// risk label column and categorical values as labels.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let specs: Vec<&FeatureSpec> = self.schema.active_specs().collect();
        let mut header = vec![ID_COLUMN.to_string()];
        header.extend(specs.iter().map(|s| s.name.clone()));
        header.push(LABEL_COLUMN.to_string());
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![row.student_id.clone()];
            rec.extend(specs.iter().zip(&row.features).map(|(s, &v)| s.format_value(v)));
            rec.push(row.label.to_string());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// A row dropped during ingestion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rejection {
    /// 1-based data row (the header is row 0).
    pub row: usize,
    pub column: String,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub cohort: Cohort,
    pub rejected: Vec<Rejection>,
}

impl Ingested {
    pub fn rejected_count(&self) -> usize {
        self.rejected.len()
    }
}

enum LabelSource {
    Gpa(usize),
    Label(usize),
}

/// Reads a fused cohort CSV.
///
/// Columns are matched by name, so their order is irrelevant. Pruned
/// columns may be present and are ignored; derived (network) columns may be
/// absent, in which case they are zero until centralities are attached.
pub fn ingest_csv<R: Read>(source: R, schema: &FeatureSchema, cohort_tag: &str) -> Result<Ingested> {
    schema.validate()?;
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.iter().all(|h| h.is_empty()) {
        return Err(Error::Schema("empty file: no header row".into()));
    }
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, h) in header.iter().enumerate() {
        if index.insert(h.as_str(), i).is_some() {
            return Err(Error::Schema(format!("duplicate column {h}")));
        }
    }
    let known: BTreeSet<&str> = schema
        .specs
        .iter()
        .map(|s| s.name.as_str())
        .chain([ID_COLUMN, GPA_COLUMN, LABEL_COLUMN])
        .collect();
    let unknown: Vec<&str> = header
        .iter()
        .map(String::as_str)
        .filter(|h| !known.contains(h))
        .collect();
    if !unknown.is_empty() {
        return Err(Error::Schema(format!("unknown columns: {}", unknown.join(", "))));
    }

    let id_col = *index
        .get(ID_COLUMN)
        .ok_or_else(|| Error::Schema(format!("missing mandatory column {ID_COLUMN}")))?;
    let label_source = match (index.get(GPA_COLUMN), index.get(LABEL_COLUMN)) {
        (Some(&g), None) => LabelSource::Gpa(g),
        (None, Some(&l)) => LabelSource::Label(l),
        (Some(_), Some(_)) => {
            return Err(Error::Schema(format!(
                "supply exactly one of {GPA_COLUMN} or {LABEL_COLUMN}, not both"
            )))
        }
        (None, None) => {
            return Err(Error::Schema(format!(
                "missing mandatory column: one of {GPA_COLUMN} or {LABEL_COLUMN}"
            )))
        }
    };

    let specs: Vec<&FeatureSpec> = schema.active_specs().collect();
    let mut columns = Vec::with_capacity(specs.len());
    let mut missing = Vec::new();
    for spec in &specs {
        match index.get(spec.name.as_str()) {
            Some(&c) => columns.push(Some(c)),
            None if spec.derived => columns.push(None),
            None => missing.push(spec.name.as_str()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::Schema(format!(
            "missing mandatory columns: {}",
            missing.join(", ")
        )));
    }

    let mut rows = Vec::new();
    let mut rejected = Vec::new();
    let mut seen_ids = BTreeSet::new();
    let mut total = 0usize;
    for (r, record) in reader.records().enumerate() {
        let line = r + 1;
        total += 1;
        let record = match record {
            Ok(rec) => rec,
            Err(e) => {
                rejected.push(Rejection {
                    row: line,
                    column: String::new(),
                    reason: e.to_string(),
                });
                continue;
            }
        };
        match parse_row(&record, &header, id_col, &label_source, &specs, &columns) {
            Ok(row) => {
                if !seen_ids.insert(row.student_id.clone()) {
                    rejected.push(Rejection {
                        row: line,
                        column: ID_COLUMN.to_string(),
                        reason: format!("duplicate student id {}", row.student_id),
                    });
                } else {
                    rows.push(row);
                }
            }
            Err((column, reason)) => rejected.push(Rejection {
                row: line,
                column,
                reason,
            }),
        }
    }
    if total == 0 {
        return Err(Error::Schema("empty file: no data rows".into()));
    }
    if rejected.len() * 2 > total {
        return Err(Error::TooManyRejected {
            rejected: rejected.len(),
            total,
        });
    }
    let cohort = Cohort::new(schema.clone(), rows, cohort_tag)?;
    Ok(Ingested { cohort, rejected })
}

fn parse_row(
    record: &csv::StringRecord,
    header: &[String],
    id_col: usize,
    label_source: &LabelSource,
    specs: &[&FeatureSpec],
    columns: &[Option<usize>],
) -> std::result::Result<CohortRow, (String, String)> {
    if record.len() != header.len() {
        return Err((
            String::new(),
            format!("expected {} fields, found {}", header.len(), record.len()),
        ));
    }
    let student_id = record[id_col].to_string();
    if student_id.is_empty() {
        return Err((ID_COLUMN.to_string(), "empty student id".into()));
    }
    let label = match *label_source {
        LabelSource::Gpa(c) => {
            let gpa: f64 = record[c]
                .parse()
                .map_err(|_| (GPA_COLUMN.to_string(), format!("cannot parse {:?}", &record[c])))?;
            derive_label(gpa).map_err(|e| (GPA_COLUMN.to_string(), e.to_string()))?
        }
        LabelSource::Label(c) => match &record[c] {
            "0" => 0,
            "1" => 1,
            other => {
                return Err((LABEL_COLUMN.to_string(), format!("label {other:?} is not 0/1")))
            }
        },
    };
    let mut features = Vec::with_capacity(specs.len());
    for (spec, col) in specs.iter().zip(columns) {
        let value = match col {
            Some(c) => spec
                .encode(&record[*c])
                .map_err(|reason| (spec.name.clone(), reason))?,
            None => 0.0,
        };
        features.push(value);
    }
    Ok(CohortRow {
        student_id,
        features,
        label,
    })
}

/// Class proportions `(p0, p1)`.
pub fn class_balance(cohort: &Cohort) -> Result<(f64, f64)> {
    if cohort.is_empty() {
        return Err(Error::Domain("class balance of an empty cohort".into()));
    }
    let p1 = cohort.rows.iter().map(|r| f64::from(r.label)).sum::<f64>() / cohort.len() as f64;
    Ok((1.0 - p1, p1))
}

/// Count of rows per label, `[negatives, positives]`.
pub fn class_counts(labels: &[u8]) -> [usize; 2] {
    let pos = labels.iter().filter(|&&y| y == 1).count();
    [labels.len() - pos, pos]
}

/// Category label → code table for every active categorical feature.
pub fn category_tables(schema: &FeatureSchema) -> BTreeMap<String, Vec<(String, f64)>> {
    schema
        .active_specs()
        .filter(|s| s.is_categorical())
        .map(|s| {
            let table = s
                .categories
                .iter()
                .enumerate()
                .map(|(i, c)| (c.clone(), (s.code_base + i as i64) as f64))
                .collect();
            (s.name.clone(), table)
        })
        .collect()
}
