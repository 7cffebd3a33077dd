//! On-disk formats for measure families and parent/child counts, and the
//! frequency estimator that turns counts into measures.
//!
//! Both formats are CSV with a leading space declaration:
//!
//! ```text
//! # space: +|-
//! mother,father,child_gender,child_type,value
//! +,+,f,+,0.4925
//! ...
//! ```
//!
//! Components are separated by `;` and alleles within a component by `|`.
//! Trait labels of multi-component spaces join allele labels with `/`.
//! Counts files use a `count` column in place of `value`. Rows of one parent
//! pair must be contiguous; missing child rows count as zero, missing pairs
//! are errors.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::genotype::{Gender, GenotypeSpace, SpaceError};
use crate::operators::{
    HeredityTensor, MeasureFamily, OperatorError, SexRatio, Support, ValidationReport, SIMPLEX_TOL,
};

/// Tolerance for tables rounded to four decimals.
pub const TABLE_TOL: f64 = 1e-3;

const COLUMNS: [&str; 4] = ["mother", "father", "child_gender", "child_type"];
const RESERVED: [char; 5] = ['|', ';', '/', ',', '#'];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: u64,
        column: usize,
        message: String,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("measure family violates its invariants:\n{0}")]
    InvariantViolation(ValidationReport),
    #[error("no rows for parent pair ({mother}, {father})")]
    MissingParentPair { mother: String, father: String },
    #[error("parent pair ({mother}, {father}) has no children")]
    ZeroTotal { mother: String, father: String },
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Operator(OperatorError),
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl From<OperatorError> for IngestError {
    fn from(e: OperatorError) -> Self {
        match e {
            OperatorError::InvalidMeasure(report) => IngestError::InvariantViolation(report),
            OperatorError::MissingPair { mother, father } => {
                IngestError::MissingParentPair { mother, father }
            }
            other => IngestError::Operator(other),
        }
    }
}

fn read_file(path: &Path) -> Result<String, IngestError> {
    fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), IngestError> {
    fs::write(path, text).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Renders the `# space:` declaration body, e.g. `A|B|AB|O`.
pub fn format_space(space: &GenotypeSpace) -> Result<String, IngestError> {
    for comp in space.components() {
        for label in comp {
            if label.is_empty() || label.trim() != label || label.contains(RESERVED) {
                return Err(IngestError::Schema(format!(
                    "allele label '{label}' cannot be written (empty, padded or contains one of | ; / , #)"
                )));
            }
        }
    }
    Ok(space
        .components()
        .iter()
        .map(|c| c.join("|"))
        .collect::<Vec<_>>()
        .join(";"))
}

pub fn parse_space(decl: &str) -> Result<GenotypeSpace, IngestError> {
    let comps: Vec<Vec<&str>> = decl
        .split(';')
        .map(|c| c.split('|').map(str::trim).collect())
        .collect();
    if comps.iter().flatten().any(|l| l.is_empty()) {
        return Err(IngestError::Schema(format!(
            "empty allele label in space '{decl}'"
        )));
    }
    Ok(GenotypeSpace::new(&comps)?)
}

/// One data row with labels resolved against the declared space.
#[derive(Debug, Clone, PartialEq)]
struct Row {
    line: u64,
    mother: usize,
    father: usize,
    child: usize,
    raw: String,
}

fn parse_rows(text: &str, value_column: &str) -> Result<(GenotypeSpace, Vec<Row>), IngestError> {
    let decl = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .and_then(|l| l.strip_prefix('#'))
        .and_then(|l| l.trim().strip_prefix("space:"))
        .ok_or_else(|| {
            IngestError::Schema("file must start with a '# space: <components>' line".into())
        })?;
    let space = parse_space(decl.trim())?;

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| csv_error(&e))?.clone();
    let expected: Vec<&str> = COLUMNS.iter().copied().chain([value_column]).collect();
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(IngestError::Schema(format!(
            "header must be '{}', found '{}'",
            expected.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(&e))?;
        let line = record.position().map_or(0, |p| p.line());
        let err = |column: usize, message: String| IngestError::Parse {
            line,
            column,
            message,
        };
        let trait_of = |column: usize| {
            let label = &record[column - 1];
            space
                .find_trait(label)
                .ok_or_else(|| err(column, format!("unknown trait label '{label}'")))
        };
        let mother = trait_of(1)?;
        let father = trait_of(2)?;
        let gender = Gender::from_symbol(&record[2]).ok_or_else(|| {
            err(
                3,
                format!("child_gender must be f or m, got '{}'", &record[2]),
            )
        })?;
        let child = space.genotype_index(gender, trait_of(4)?);
        rows.push(Row {
            line,
            mother,
            father,
            child,
            raw: record[4].to_string(),
        });
    }
    Ok((space, rows))
}

fn csv_error(e: &csv::Error) -> IngestError {
    let line = e.position().map_or(0, |p| p.line());
    IngestError::Parse {
        line,
        column: 0,
        message: e.to_string(),
    }
}

/// Groups rows by parent pair, enforcing contiguity and one row per child.
fn group_rows<T: Copy + Default>(
    space: &GenotypeSpace,
    rows: &[Row],
    parse: impl Fn(&Row) -> Result<T, IngestError>,
) -> Result<BTreeMap<(usize, usize), Vec<T>>, IngestError> {
    let mut out: BTreeMap<(usize, usize), Vec<T>> = BTreeMap::new();
    let mut filled: BTreeSet<(usize, usize, usize)> = BTreeSet::new();
    let mut current = None;
    for row in rows {
        let key = (row.mother, row.father);
        if current != Some(key) {
            if out.contains_key(&key) {
                return Err(IngestError::Schema(format!(
                    "line {}: rows for pair ({}, {}) are not contiguous",
                    row.line,
                    space.trait_label(row.mother),
                    space.trait_label(row.father)
                )));
            }
            out.insert(key, vec![T::default(); space.len()]);
            current = Some(key);
        }
        if !filled.insert((row.mother, row.father, row.child)) {
            return Err(IngestError::Schema(format!(
                "line {}: duplicate row for child {} of pair ({}, {})",
                row.line,
                space.genotype_label(row.child),
                space.trait_label(row.mother),
                space.trait_label(row.father)
            )));
        }
        let value = parse(row)?;
        out.get_mut(&key).expect("inserted above")[row.child] = value;
    }
    Ok(out)
}

/// A measure table as written in a file, before any invariant checks.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureTable {
    pub space: GenotypeSpace,
    /// `measures[mother * m + father]`, zero-filled for missing children.
    pub measures: Vec<Vec<f64>>,
}

impl MeasureTable {
    pub fn parse(text: &str) -> Result<Self, IngestError> {
        let (space, rows) = parse_rows(text, "value")?;
        let mut grouped = group_rows(&space, &rows, |row| match row.raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(IngestError::Parse {
                line: row.line,
                column: 5,
                message: format!("'{}' is not a finite decimal number", row.raw),
            }),
        })?;
        let m = space.trait_count();
        let mut measures = Vec::with_capacity(m * m);
        for mother in 0..m {
            for father in 0..m {
                let row = grouped.remove(&(mother, father)).ok_or_else(|| {
                    IngestError::MissingParentPair {
                        mother: space.trait_label(mother),
                        father: space.trait_label(father),
                    }
                })?;
                measures.push(row);
            }
        }
        Ok(Self { space, measures })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, IngestError> {
        Self::parse(&read_file(path.as_ref())?)
    }

    /// Heredity tensor `2μ` with no invariant checks, for validation reports.
    pub fn to_tensor(&self) -> HeredityTensor {
        let m = self.space.trait_count();
        HeredityTensor::from_fn(
            self.space.clone(),
            SexRatio::FISHER,
            Support::Full,
            |mother, father, child| 2.0 * self.measures[mother * m + father][child],
        )
    }

    pub fn into_family(self, opts: &LoadOptions) -> Result<MeasureFamily, IngestError> {
        let family = MeasureFamily::new(self.space, self.measures, opts.tolerance)?;
        if opts.renormalize {
            Ok(family.renormalized()?)
        } else {
            Ok(family)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadOptions {
    /// Tolerance for row sums and gender symmetry.
    pub tolerance: f64,
    /// Scale each measure to sum exactly to 1 after the check.
    pub renormalize: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            tolerance: TABLE_TOL,
            renormalize: false,
        }
    }
}

pub fn parse_measure_family(text: &str, opts: &LoadOptions) -> Result<MeasureFamily, IngestError> {
    MeasureTable::parse(text)?.into_family(opts)
}

pub fn load_measure_family(
    path: impl AsRef<Path>,
    opts: &LoadOptions,
) -> Result<MeasureFamily, IngestError> {
    parse_measure_family(&read_file(path.as_ref())?, opts)
}

/// Writes every entry, values in shortest round-trip decimal form.
pub fn format_measure_family(family: &MeasureFamily) -> Result<String, IngestError> {
    let space = family.space();
    let mut out = String::new();
    writeln!(out, "# space: {}", format_space(space)?).unwrap();
    writeln!(out, "{},value", COLUMNS.join(",")).unwrap();
    let m = space.trait_count();
    for mother in 0..m {
        for father in 0..m {
            for (child, v) in family.measure(mother, father).iter().enumerate() {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    space.trait_label(mother),
                    space.trait_label(father),
                    space.gender_of(child),
                    space.trait_label(space.trait_of(child)),
                    v
                )
                .unwrap();
            }
        }
    }
    Ok(out)
}

pub fn save_measure_family(
    family: &MeasureFamily,
    path: impl AsRef<Path>,
) -> Result<(), IngestError> {
    write_file(path.as_ref(), &format_measure_family(family)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountRow {
    pub mother: usize,
    pub father: usize,
    /// Child genotype index.
    pub child: usize,
    pub count: u64,
}

/// Parent/child counts `N_child(σ', σ'')` over a declared space.
#[derive(Debug, Clone, PartialEq)]
pub struct CountsTable {
    space: GenotypeSpace,
    rows: Vec<CountRow>,
}

impl CountsTable {
    pub fn new(space: GenotypeSpace, rows: Vec<CountRow>) -> Result<Self, IngestError> {
        let m = space.trait_count();
        for r in &rows {
            if r.mother >= m || r.father >= m || r.child >= space.len() {
                return Err(IngestError::Schema(format!("count row {r:?} out of range")));
            }
        }
        Ok(Self { space, rows })
    }

    pub fn parse(text: &str) -> Result<Self, IngestError> {
        let (space, rows) = parse_rows(text, "count")?;
        // validates contiguity and uniqueness
        group_rows(&space, &rows, parse_count)?;
        let rows = rows
            .iter()
            .map(|row| {
                Ok(CountRow {
                    mother: row.mother,
                    father: row.father,
                    child: row.child,
                    count: parse_count(row)?,
                })
            })
            .collect::<Result<_, IngestError>>()?;
        Ok(Self { space, rows })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, IngestError> {
        Self::parse(&read_file(path.as_ref())?)
    }

    pub fn space(&self) -> &GenotypeSpace {
        &self.space
    }

    pub fn rows(&self) -> &[CountRow] {
        &self.rows
    }

    pub fn to_csv(&self) -> Result<String, IngestError> {
        let space = &self.space;
        let mut out = String::new();
        writeln!(out, "# space: {}", format_space(space)?).unwrap();
        writeln!(out, "{},count", COLUMNS.join(",")).unwrap();
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                space.trait_label(r.mother),
                space.trait_label(r.father),
                space.gender_of(r.child),
                space.trait_label(space.trait_of(r.child)),
                r.count
            )
            .unwrap();
        }
        Ok(out)
    }
}

fn parse_count(row: &Row) -> Result<u64, IngestError> {
    row.raw.parse::<u64>().map_err(|_| IngestError::Parse {
        line: row.line,
        column: 5,
        message: format!("'{}' is not a non-negative integer count", row.raw),
    })
}

/// Frequency estimate `μ(child) = N_child / N_total` per parent pair.
///
/// With `symmetrize`, daughters and sons of the same trait are pooled and the
/// pooled frequency is split evenly between the two genders. Without it,
/// gender-asymmetric counts fail the measure invariants.
pub fn estimate_measures(
    space: &GenotypeSpace,
    counts: &CountsTable,
    symmetrize: bool,
) -> Result<MeasureFamily, IngestError> {
    if counts.space() != space {
        return Err(IngestError::Schema(
            "counts declare a different genotype space".into(),
        ));
    }
    let m = space.trait_count();
    let mut tallies: BTreeMap<(usize, usize), Vec<u64>> = BTreeMap::new();
    for r in counts.rows() {
        tallies
            .entry((r.mother, r.father))
            .or_insert_with(|| vec![0; space.len()])[r.child] += r.count;
    }
    let mut measures = Vec::with_capacity(m * m);
    for mother in 0..m {
        for father in 0..m {
            let labels = || (space.trait_label(mother), space.trait_label(father));
            let Some(tally) = tallies.get(&(mother, father)) else {
                let (mother, father) = labels();
                return Err(IngestError::MissingParentPair { mother, father });
            };
            let total: u64 = tally.iter().sum();
            if total == 0 {
                let (mother, father) = labels();
                return Err(IngestError::ZeroTotal { mother, father });
            }
            let total = total as f64;
            let row = if symmetrize {
                (0..space.len())
                    .map(|k| {
                        let t = space.trait_of(k);
                        (tally[t] + tally[t + m]) as f64 / (2.0 * total)
                    })
                    .collect()
            } else {
                tally.iter().map(|&c| c as f64 / total).collect()
            };
            measures.push(row);
        }
    }
    Ok(MeasureFamily::new(space.clone(), measures, SIMPLEX_TOL)?)
}
