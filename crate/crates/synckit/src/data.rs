//! Core data model: per-subject time-series matrices, cohorts, and the
//! on-disk formats.
//!
//! A subject's signal is a `T x V` matrix (time by vertex). Columns are
//! normalized to zero mean and unit norm so that each vertex's time series
//! lives on the unit hypersphere; all downstream distances rely on that.

use std::collections::{BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::{compensated_sum, fmt_sig9};

pub const TIMESERIES_MAGIC: [u8; 4] = *b"SKTS";
pub const TIMESERIES_VERSION: u32 = 1;

/// Columns whose centered norm falls below this fraction of their original
/// scale are treated as zero-variance (flat) vertices.
const ZERO_VARIANCE_REL_TOL: f64 = 1e-12;

/// How to treat zero-variance (flat) columns during normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizeMode {
    /// Error out, naming the offending vertex indices.
    Strict,
    /// Zero the column and report its index for cohort-level exclusion.
    Permissive,
}

/// One subject's `T x V` signal.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesMatrix {
    values: DMatrix<f64>,
    normalized: bool,
}

impl TimeSeriesMatrix {
    /// Wraps a raw matrix, rejecting non-finite entries and empty dimensions.
    pub fn from_matrix(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::InvalidDimensions {
                t: values.nrows() as u64,
                v: values.ncols() as u64,
            });
        }
        if !values.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite {
                context: "time-series matrix".to_string(),
            });
        }
        Ok(Self {
            values,
            normalized: false,
        })
    }

    /// Wraps a matrix whose columns are already zero-mean unit-norm (or
    /// all-zero). Callers are responsible for that invariant.
    pub(crate) fn from_normalized_parts(values: DMatrix<f64>) -> Self {
        Self {
            values,
            normalized: true,
        }
    }

    pub fn n_timepoints(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_vertices(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Per-vertex time series as a contiguous slice.
    pub fn column(&self, vertex: usize) -> nalgebra::DVectorView<'_, f64> {
        self.values.column(vertex)
    }
}

/// Centers a column twice (the second pass removes the rounding residue of
/// the first) and scales it to unit norm. Returns false when the column is
/// flat and was left as written by the caller.
fn normalize_column(col: &mut [f64]) -> bool {
    let original_norm = compensated_sum(col.iter().map(|x| x * x)).sqrt();
    for _ in 0..2 {
        let m = compensated_sum(col.iter().copied()) / col.len() as f64;
        for x in col.iter_mut() {
            *x -= m;
        }
    }
    let norm = compensated_sum(col.iter().map(|x| x * x)).sqrt();
    if norm <= ZERO_VARIANCE_REL_TOL * original_norm.max(1.0) {
        return false;
    }
    for x in col.iter_mut() {
        *x /= norm;
    }
    true
}

/// Normalizes every column to zero mean and unit norm.
///
/// Already-normalized input is returned unchanged, so the operation is
/// exactly idempotent. In permissive mode zero-variance columns become
/// all-zero and their indices are returned for cohort-level exclusion; in
/// strict mode they are an error.
pub fn normalize_columns(
    m: &TimeSeriesMatrix,
    mode: NormalizeMode,
) -> Result<(TimeSeriesMatrix, Vec<usize>)> {
    if m.n_timepoints() < 2 {
        return Err(Error::InvalidParameter {
            name: "n_timepoints",
            reason: format!("need at least 2 timepoints, got {}", m.n_timepoints()),
        });
    }
    if m.normalized {
        return Ok((m.clone(), Vec::new()));
    }
    let mut values = m.values.clone();
    let mut flat = Vec::new();
    for v in 0..values.ncols() {
        let mut col = values.column_mut(v);
        if !normalize_column(col.as_mut_slice()) {
            flat.push(v);
            col.fill(0.0);
        }
    }
    if !flat.is_empty() && mode == NormalizeMode::Strict {
        return Err(Error::ZeroVarianceColumns { vertices: flat });
    }
    Ok((TimeSeriesMatrix::from_normalized_parts(values), flat))
}

/// One subject of a cohort.
#[derive(Debug, Clone)]
pub struct Subject {
    pub id: String,
    pub data: TimeSeriesMatrix,
}

/// N subjects with identical dimensions plus their scalar clinical scores.
#[derive(Debug, Clone)]
pub struct Cohort {
    subjects: Vec<Subject>,
    scores: Vec<f64>,
    excluded_vertices: BTreeSet<usize>,
}

impl Cohort {
    /// Builds a cohort from raw subject matrices, normalizing each one and
    /// collecting zero-variance vertices according to `mode`.
    pub fn assemble(
        subjects: Vec<(String, TimeSeriesMatrix)>,
        scores: Vec<f64>,
        mode: NormalizeMode,
    ) -> Result<Self> {
        if subjects.is_empty() {
            return Err(Error::EmptyInput {
                context: "cohort has no subjects".to_string(),
            });
        }
        if subjects.len() != scores.len() {
            return Err(Error::InvalidParameter {
                name: "scores",
                reason: format!(
                    "{} scores for {} subjects",
                    scores.len(),
                    subjects.len()
                ),
            });
        }
        if let Some(bad) = scores.iter().find(|s| !s.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("clinical score {bad}"),
            });
        }
        let mut seen = HashSet::new();
        let (t0, v0) = (
            subjects[0].1.n_timepoints(),
            subjects[0].1.n_vertices(),
        );
        let mut excluded = BTreeSet::new();
        let mut out = Vec::with_capacity(subjects.len());
        for (id, data) in subjects {
            if !seen.insert(id.clone()) {
                return Err(Error::DuplicateSubject { id });
            }
            if data.n_timepoints() != t0 || data.n_vertices() != v0 {
                return Err(Error::DimensionMismatch {
                    context: format!("subject {id}"),
                    expected_rows: t0,
                    expected_cols: v0,
                    found_rows: data.n_timepoints(),
                    found_cols: data.n_vertices(),
                });
            }
            let (normalized, flat) = normalize_columns(&data, mode)?;
            excluded.extend(flat);
            out.push(Subject {
                id,
                data: normalized,
            });
        }
        Ok(Self {
            subjects: out,
            scores,
            excluded_vertices: excluded,
        })
    }

    pub(crate) fn from_parts(
        subjects: Vec<Subject>,
        scores: Vec<f64>,
        excluded_vertices: BTreeSet<usize>,
    ) -> Self {
        Self {
            subjects,
            scores,
            excluded_vertices,
        }
    }

    pub fn n_subjects(&self) -> usize {
        self.subjects.len()
    }

    pub fn n_timepoints(&self) -> usize {
        self.subjects[0].data.n_timepoints()
    }

    pub fn n_vertices(&self) -> usize {
        self.subjects[0].data.n_vertices()
    }

    pub fn subjects(&self) -> &[Subject] {
        &self.subjects
    }

    pub fn subject(&self, i: usize) -> &Subject {
        &self.subjects[i]
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn excluded_vertices(&self) -> &BTreeSet<usize> {
        &self.excluded_vertices
    }

    pub fn is_excluded(&self, vertex: usize) -> bool {
        self.excluded_vertices.contains(&vertex)
    }

    /// Same cohort with replaced scores (e.g. a permuted copy).
    pub fn with_scores(&self, scores: Vec<f64>) -> Result<Self> {
        if scores.len() != self.subjects.len() {
            return Err(Error::InvalidParameter {
                name: "scores",
                reason: format!(
                    "{} scores for {} subjects",
                    scores.len(),
                    self.subjects.len()
                ),
            });
        }
        if let Some(bad) = scores.iter().find(|s| !s.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("clinical score {bad}"),
            });
        }
        Ok(Self {
            subjects: self.subjects.clone(),
            scores,
            excluded_vertices: self.excluded_vertices.clone(),
        })
    }

    /// Resampled cohort for bootstrap runs. Repeated subjects get a
    /// `~k` occurrence suffix so ids stay unique.
    pub fn resample(&self, indices: &[usize]) -> Result<Self> {
        let mut counts: std::collections::HashMap<usize, usize> =
            std::collections::HashMap::new();
        let mut subjects = Vec::with_capacity(indices.len());
        let mut scores = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.subjects.len() {
                return Err(Error::InvalidParameter {
                    name: "indices",
                    reason: format!("subject index {i} out of range"),
                });
            }
            let k = counts.entry(i).or_insert(0);
            let base = &self.subjects[i];
            let id = if *k == 0 {
                base.id.clone()
            } else {
                format!("{}~{}", base.id, k)
            };
            *k += 1;
            subjects.push(Subject {
                id,
                data: base.data.clone(),
            });
            scores.push(self.scores[i]);
        }
        Ok(Self {
            subjects,
            scores,
            excluded_vertices: self.excluded_vertices.clone(),
        })
    }
}

// ---------------------------------------------------------------------------
// Binary time-series format
// ---------------------------------------------------------------------------

/// Writes the `SKTS` little-endian binary format: magic, u32 version,
/// u64 T, u64 V, then `T*V` f64 values row-major (vertex fastest).
pub fn store_timeseries(path: &Path, m: &TimeSeriesMatrix) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let wrap = |e: std::io::Error| Error::io(path, e);
    w.write_all(&TIMESERIES_MAGIC).map_err(wrap)?;
    w.write_u32::<LittleEndian>(TIMESERIES_VERSION).map_err(wrap)?;
    w.write_u64::<LittleEndian>(m.n_timepoints() as u64)
        .map_err(wrap)?;
    w.write_u64::<LittleEndian>(m.n_vertices() as u64)
        .map_err(wrap)?;
    for t in 0..m.n_timepoints() {
        for v in 0..m.n_vertices() {
            w.write_f64::<LittleEndian>(m.values[(t, v)]).map_err(wrap)?;
        }
    }
    w.flush().map_err(wrap)
}

/// Reads the `SKTS` format back. The stored values round-trip bit-exactly;
/// the normalized flag is not persisted, so the result reports unnormalized.
pub fn load_timeseries(path: &Path) -> Result<TimeSeriesMatrix> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let wrap = |e: std::io::Error| Error::io(path, e);

    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(wrap)?;
    if magic != TIMESERIES_MAGIC {
        return Err(Error::BadMagic {
            expected: TIMESERIES_MAGIC,
            found: magic,
        });
    }
    let version = r.read_u32::<LittleEndian>().map_err(wrap)?;
    if version != TIMESERIES_VERSION {
        return Err(Error::VersionMismatch {
            expected: TIMESERIES_VERSION,
            found: version,
        });
    }
    let t = r.read_u64::<LittleEndian>().map_err(wrap)?;
    let v = r.read_u64::<LittleEndian>().map_err(wrap)?;
    if t == 0 || v == 0 || t.checked_mul(v).is_none_or(|n| n > (1 << 34)) {
        return Err(Error::InvalidDimensions { t, v });
    }
    let n = (t * v) as usize;
    let mut payload = vec![0u8; n * 8];
    let mut read = 0usize;
    while read < payload.len() {
        match r.read(&mut payload[read..]).map_err(wrap)? {
            0 => {
                return Err(Error::PayloadLength {
                    expected: (n * 8) as u64,
                    found: read as u64,
                })
            }
            k => read += k,
        }
    }
    if r.read(&mut [0u8; 1]).map_err(wrap)? != 0 {
        return Err(Error::PayloadLength {
            expected: (n * 8) as u64,
            found: (n * 8 + 1) as u64,
        });
    }
    let (t, v) = (t as usize, v as usize);
    let mut values = DMatrix::<f64>::zeros(t, v);
    for ti in 0..t {
        for vi in 0..v {
            let off = (ti * v + vi) * 8;
            let x = f64::from_le_bytes(payload[off..off + 8].try_into().unwrap());
            if !x.is_finite() {
                return Err(Error::NonFinite {
                    context: format!("stored value at t={ti}, v={vi}"),
                });
            }
            values[(ti, vi)] = x;
        }
    }
    TimeSeriesMatrix::from_matrix(values)
}

// ---------------------------------------------------------------------------
// Cohort manifest
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct ManifestDoc {
    subjects: Vec<ManifestEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestEntry {
    id: String,
    timeseries: String,
    #[serde(default)]
    score: Option<f64>,
}

/// Loads a cohort from a JSON manifest referencing per-subject `SKTS` files
/// (paths resolved relative to the manifest). Subjects are normalized on
/// load; manifest order defines subject order.
pub fn load_cohort(manifest_path: &Path, mode: NormalizeMode) -> Result<Cohort> {
    let text =
        std::fs::read_to_string(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let doc: ManifestDoc = serde_json::from_str(&text).map_err(|e| Error::ManifestParse {
        path: manifest_path.to_path_buf(),
        source: e,
    })?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let mut subjects = Vec::with_capacity(doc.subjects.len());
    let mut scores = Vec::with_capacity(doc.subjects.len());
    for entry in doc.subjects {
        let score = entry.score.ok_or(Error::MissingScore {
            subject: entry.id.clone(),
        })?;
        let data = load_timeseries(&base.join(&entry.timeseries))?;
        subjects.push((entry.id, data));
        scores.push(score);
    }
    Cohort::assemble(subjects, scores, mode)
}

/// Writes a cohort to `dir` as one `SKTS` file per subject plus a
/// `manifest.json`, and returns the manifest path.
pub fn store_cohort(dir: &Path, cohort: &Cohort) -> Result<std::path::PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut entries = Vec::with_capacity(cohort.n_subjects());
    for (i, subject) in cohort.subjects().iter().enumerate() {
        let file = format!("{}.skts", subject.id);
        store_timeseries(&dir.join(&file), &subject.data)?;
        entries.push(ManifestEntry {
            id: subject.id.clone(),
            timeseries: file,
            score: Some(cohort.scores()[i]),
        });
    }
    let manifest = dir.join("manifest.json");
    let doc = ManifestDoc { subjects: entries };
    let text = serde_json::to_string_pretty(&doc).expect("manifest serialization");
    std::fs::write(&manifest, text).map_err(|e| Error::io(&manifest, e))?;
    Ok(manifest)
}

// ---------------------------------------------------------------------------
// Statistic maps
// ---------------------------------------------------------------------------

/// Per-vertex test result. Excluded vertices carry NaN statistic and
/// p/q-values and are never rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct StatMap {
    pub vertex_index: usize,
    pub statistic: f64,
    pub p_value: f64,
    pub q_value: f64,
    pub rejected: bool,
}

/// Writes stat maps as TSV, one row per non-excluded vertex (rows whose
/// p-value is NaN are skipped), floats with nine significant digits.
pub fn write_stat_maps<W: Write>(mut w: W, maps: &[StatMap]) -> Result<()> {
    let io_err = |e: std::io::Error| Error::io("<statmap writer>", e);
    writeln!(w, "vertex\tstatistic\tp\tq\trejected").map_err(io_err)?;
    for m in maps {
        if m.p_value.is_nan() {
            continue;
        }
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}",
            m.vertex_index,
            fmt_sig9(m.statistic),
            fmt_sig9(m.p_value),
            fmt_sig9(m.q_value),
            u8::from(m.rejected),
        )
        .map_err(io_err)?;
    }
    Ok(())
}

pub fn write_stat_maps_file(path: &Path, maps: &[StatMap]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_stat_maps(BufWriter::new(file), maps)
}
