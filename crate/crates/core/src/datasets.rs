//! Stress–strain benchmark data: manifest/CSV ingestion, synthetic
//! ground-truth generation and the invariant-plane generalization map.
//!
//! A dataset directory holds a JSON manifest and one CSV per loading mode:
//!
//! ```text
//! {"name": "...", "unit": "MPa", "modes": [{"mode": "uniaxial_tension", "csv": "ut.csv"}]}
//! ```
//!
//! CSV files start with the header `param,stress` (optionally `,split`),
//! use `.` as decimal point and may contain `#` comment lines.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mechanics::{DeformationGradient, LoadingMode, MechanicsError};
use crate::model::{ConstitutiveModel, ModelError, ModelFile};
use crate::training::{predict_curve, TrainError};
use crate::validators::{validate_all, ToleranceConfig};

/// Denominator floor of the invariant-plane relative error, in stress units.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("missing file {}", .0.display())]
    MissingFile(PathBuf),
    #[error("{}:{line}: malformed row: {reason}", path.display())]
    MalformedRow {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("params of mode {0} are not strictly increasing")]
    NonMonotoneParams(LoadingMode),
    #[error("dataset has no test samples")]
    NoTestSamples,
    #[error("manifest {}: {reason}", path.display())]
    Manifest { path: PathBuf, reason: String },
    #[error("reference model is not canonical: {0}")]
    NonCanonicalReference(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Mechanics(#[from] MechanicsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<TrainError> for DatasetError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::Model(m) => DatasetError::Model(m),
            TrainError::Mechanics(m) => DatasetError::Mechanics(m),
            other => DatasetError::InvalidArgument(other.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StressUnit {
    #[serde(rename = "kPa")]
    KPa,
    #[serde(rename = "MPa")]
    MPa,
}

impl fmt::Display for StressUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StressUnit::KPa => "kPa",
            StressUnit::MPa => "MPa",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    #[default]
    Train,
    Test,
}

/// How split tags are assigned to the rows of one CSV.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitRule {
    #[default]
    AllTrain,
    AllTest,
    /// Read from the `split` column.
    Column,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub param: f64,
    pub stress: f64,
    pub split: Split,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSamples {
    pub mode: LoadingMode,
    pub samples: Vec<Sample>,
}

impl ModeSamples {
    pub fn params(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.param).collect()
    }

    pub fn stresses(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.stress).collect()
    }

    fn check_monotone(&self) -> Result<(), DatasetError> {
        if self.samples.windows(2).all(|w| w[0].param < w[1].param) {
            Ok(())
        } else {
            Err(DatasetError::NonMonotoneParams(self.mode))
        }
    }
}

/// Model that generated a synthetic dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorInfo {
    pub name: String,
    pub model: ModelFile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StressStrainDataset {
    pub name: String,
    pub unit: StressUnit,
    pub generator: Option<GeneratorInfo>,
    pub modes: Vec<ModeSamples>,
}

impl StressStrainDataset {
    /// Builds a dataset, rejecting non-increasing params.
    pub fn new(
        name: impl Into<String>,
        unit: StressUnit,
        modes: Vec<ModeSamples>,
    ) -> Result<Self, DatasetError> {
        for m in &modes {
            m.check_monotone()?;
        }
        Ok(Self {
            name: name.into(),
            unit,
            generator: None,
            modes,
        })
    }

    pub fn len(&self) -> usize {
        self.modes.iter().map(|m| m.samples.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn mode(&self, mode: LoadingMode) -> Option<&ModeSamples> {
        self.modes.iter().find(|m| m.mode == mode)
    }

    fn filtered(&self, split: Split) -> Self {
        Self {
            name: self.name.clone(),
            unit: self.unit,
            generator: self.generator.clone(),
            modes: self
                .modes
                .iter()
                .map(|m| ModeSamples {
                    mode: m.mode,
                    samples: m.samples.iter().copied().filter(|s| s.split == split).collect(),
                })
                .filter(|m| !m.samples.is_empty())
                .collect(),
        }
    }

    /// Train and test views in original order. With `require_test`, an empty
    /// test view is an error.
    pub fn train_test_split(&self, require_test: bool) -> Result<(Self, Self), DatasetError> {
        let test = self.filtered(Split::Test);
        if require_test && test.is_empty() {
            return Err(DatasetError::NoTestSamples);
        }
        Ok((self.filtered(Split::Train), test))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestMode {
    pub mode: LoadingMode,
    pub csv: String,
    #[serde(default)]
    pub split: SplitRule,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub unit: StressUnit,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorInfo>,
    pub modes: Vec<ManifestMode>,
}

fn read_existing(path: &Path) -> Result<String, DatasetError> {
    fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => DatasetError::MissingFile(path.to_path_buf()),
        _ => DatasetError::Io(e),
    })
}

fn parse_csv(path: &Path, rule: SplitRule) -> Result<Vec<Sample>, DatasetError> {
    let text = read_existing(path)?;
    let malformed = |line: usize, reason: String| DatasetError::MalformedRow {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| malformed(1, e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    let has_split = match header.as_slice() {
        [p, s] if p == "param" && s == "stress" => false,
        [p, s, t] if p == "param" && s == "stress" && t == "split" => true,
        _ => {
            return Err(malformed(
                1,
                format!("expected header `param,stress[,split]`, got `{}`", header.join(",")),
            ))
        }
    };
    if rule == SplitRule::Column && !has_split {
        return Err(malformed(1, "split rule `column` needs a `split` column".into()));
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            malformed(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != header.len() {
            return Err(malformed(
                line,
                format!("expected {} fields, got {}", header.len(), record.len()),
            ));
        }
        let num = |i: usize| -> Result<f64, DatasetError> {
            let v: f64 = record[i]
                .parse()
                .map_err(|_| malformed(line, format!("`{}` is not a number", &record[i])))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(malformed(line, format!("`{}` is not finite", &record[i])))
            }
        };
        let split = match rule {
            SplitRule::AllTrain => Split::Train,
            SplitRule::AllTest => Split::Test,
            SplitRule::Column => match &record[2] {
                "train" => Split::Train,
                "test" => Split::Test,
                other => return Err(malformed(line, format!("unknown split tag `{other}`"))),
            },
        };
        out.push(Sample {
            param: num(0)?,
            stress: num(1)?,
            split,
        });
    }
    Ok(out)
}

/// Reads a manifest and the per-mode CSV files it references (paths are
/// relative to the manifest's directory).
pub fn load_dataset(manifest_path: impl AsRef<Path>) -> Result<StressStrainDataset, DatasetError> {
    let manifest_path = manifest_path.as_ref();
    let text = read_existing(manifest_path)?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| DatasetError::Manifest {
        path: manifest_path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let mut modes = Vec::with_capacity(manifest.modes.len());
    for m in &manifest.modes {
        if modes.iter().any(|x: &ModeSamples| x.mode == m.mode) {
            return Err(DatasetError::Manifest {
                path: manifest_path.to_path_buf(),
                reason: format!("mode {} listed twice", m.mode),
            });
        }
        modes.push(ModeSamples {
            mode: m.mode,
            samples: parse_csv(&base.join(&m.csv), m.split)?,
        });
    }
    let mut ds = StressStrainDataset::new(manifest.name, manifest.unit, modes)?;
    ds.generator = manifest.generator;
    Ok(ds)
}

fn fmt_num(v: f64) -> String {
    format!("{v:?}")
}

/// Writes `manifest.json` and one `<mode>.csv` per mode into `dir` and
/// returns the manifest path. Output is byte-for-byte deterministic.
pub fn write_dataset(
    dataset: &StressStrainDataset,
    dir: impl AsRef<Path>,
) -> Result<PathBuf, DatasetError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut entries = Vec::new();
    for m in &dataset.modes {
        let has_test = m.samples.iter().any(|s| s.split == Split::Test);
        let has_train = m.samples.iter().any(|s| s.split == Split::Train);
        let rule = match (has_train, has_test) {
            (true, true) => SplitRule::Column,
            (false, true) => SplitRule::AllTest,
            _ => SplitRule::AllTrain,
        };
        let mut body = String::from(if rule == SplitRule::Column {
            "param,stress,split\n"
        } else {
            "param,stress\n"
        });
        for s in &m.samples {
            body.push_str(&fmt_num(s.param));
            body.push(',');
            body.push_str(&fmt_num(s.stress));
            if rule == SplitRule::Column {
                body.push_str(match s.split {
                    Split::Train => ",train",
                    Split::Test => ",test",
                });
            }
            body.push('\n');
        }
        let csv = format!("{}.csv", m.mode.name());
        fs::write(dir.join(&csv), body)?;
        entries.push(ManifestMode {
            mode: m.mode,
            csv,
            split: rule,
        });
    }
    let manifest = Manifest {
        name: dataset.name.clone(),
        unit: dataset.unit,
        generator: dataset.generator.clone(),
        modes: entries,
    };
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

/// Dataset whose stresses are the reference model's predictions. The
/// reference must pass every validator.
pub fn generate_synthetic(
    reference: &ConstitutiveModel<f64>,
    name: impl Into<String>,
    unit: StressUnit,
    modes: &[(LoadingMode, Vec<f64>)],
) -> Result<StressStrainDataset, DatasetError> {
    let report = validate_all(reference, &ToleranceConfig::default());
    if !report.overall {
        let failed: Vec<_> = report.failed().iter().map(|id| id.name()).collect();
        return Err(DatasetError::NonCanonicalReference(failed.join(", ")));
    }
    let mut out = Vec::with_capacity(modes.len());
    for (mode, params) in modes {
        let stress = predict_curve(reference, *mode, params)?;
        out.push(ModeSamples {
            mode: *mode,
            samples: params
                .iter()
                .zip(stress)
                .map(|(&param, stress)| Sample {
                    param,
                    stress,
                    split: Split::Train,
                })
                .collect(),
        });
    }
    let mut ds = StressStrainDataset::new(name, unit, out)?;
    ds.generator = Some(GeneratorInfo {
        name: reference.name().to_string(),
        model: ModelFile::from_model(reference),
    });
    Ok(ds)
}

/// `n` evenly spaced values from `a` to `b`, both included.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Stretch grid of the rubber protocols used for synthetic data.
pub fn rubber_protocol_params() -> Vec<f64> {
    linspace(1.0, 3.0, 15)
}

/// The three rubber protocols, each on [`rubber_protocol_params`].
pub fn rubber_protocols() -> Vec<(LoadingMode, Vec<f64>)> {
    [
        LoadingMode::UniaxialTension,
        LoadingMode::Equibiaxial,
        LoadingMode::PureShear,
    ]
    .into_iter()
    .map(|m| (m, rubber_protocol_params()))
    .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneRecord {
    pub lambda1: f64,
    pub a: f64,
    pub i1: f64,
    pub i2: f64,
    pub pred: f64,
    pub truth: f64,
    pub rel_err: f64,
}

/// Grid between uniaxial (`a = −1/2`), pure shear (`a = 0`) and equibiaxial
/// (`a = 1`) tension, with `F = diag(λ1, λ1^a, λ1^(−1−a))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantPlaneMap {
    pub n: usize,
    pub records: Vec<PlaneRecord>,
}

/// Exponent rows that coincide with a loading protocol.
pub const PLANE_PROTOCOL_EXPONENTS: [f64; 3] = [-0.5, 0.0, 1.0];

impl InvariantPlaneMap {
    pub fn max_rel_err(&self) -> f64 {
        self.records.iter().fold(0.0, |m, r| m.max(r.rel_err))
    }

    /// Largest relative error on rows that are not training protocols.
    pub fn max_rel_err_off_paths(&self) -> f64 {
        self.records
            .iter()
            .filter(|r| !PLANE_PROTOCOL_EXPONENTS.contains(&r.a))
            .fold(0.0, |m, r| m.max(r.rel_err))
    }

    /// Records of the row with exponent `a`, in increasing `λ1`.
    pub fn row(&self, a: f64) -> Vec<PlaneRecord> {
        self.records.iter().copied().filter(|r| r.a == a).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["λ1", "a", "I1", "I2", "pred", "truth", "rel_err"])
            .expect("in-memory write");
        for r in &self.records {
            w.write_record(
                [r.lambda1, r.a, r.i1, r.i2, r.pred, r.truth, r.rel_err].map(fmt_num),
            )
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
    }
}

/// Relative P11 error of `model` against `truth` over the invariant plane.
pub fn invariant_plane_eval(
    model: &ConstitutiveModel<f64>,
    truth: &ConstitutiveModel<f64>,
    lambda1_max: f64,
    n: usize,
) -> Result<InvariantPlaneMap, DatasetError> {
    if !(lambda1_max > 1.0) || n < 2 {
        return Err(DatasetError::InvalidArgument(format!(
            "need λ1_max > 1 and n ≥ 2, got {lambda1_max} and {n}"
        )));
    }
    let lambdas = linspace(1.0, lambda1_max, n);
    let exps = linspace(-0.5, 1.0, n);
    let mut records = Vec::with_capacity(n * n);
    for &a in &exps {
        for &l in &lambdas {
            let f = DeformationGradient::plane_strain(l, 0.0, 0.0, l.powf(a))?;
            let inv = f.invariants();
            let pred = model.piola_stress(&f)?[(0, 0)];
            let truth_p = truth.piola_stress(&f)?[(0, 0)];
            let diff = (pred - truth_p).abs();
            let rel_err = if pred.abs() < RELATIVE_ERROR_FLOOR && truth_p.abs() < RELATIVE_ERROR_FLOOR {
                0.0
            } else {
                diff / truth_p.abs().max(RELATIVE_ERROR_FLOOR)
            };
            records.push(PlaneRecord {
                lambda1: l,
                a,
                i1: inv.i1,
                i2: inv.i2,
                pred,
                truth: truth_p,
                rel_err,
            });
        }
    }
    Ok(InvariantPlaneMap { n, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{neo_hookean, reference_material, sine_fixture};
    use std::io::Write;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        let mut f = fs::File::create(&p).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        p
    }

    fn one_mode_manifest(dir: &Path, csv_body: &str, split: &str) -> PathBuf {
        write(dir, "a.csv", csv_body);
        write(
            dir,
            "m.json",
            &format!(
                r#"{{"name":"t","unit":"kPa","modes":[{{"mode":"simple_shear","csv":"a.csv"{split}}}]}}"#
            ),
        )
    }

    #[test]
    fn malformed_row_reports_line() {
        let d = tempfile::tempdir().unwrap();
        let m = one_mode_manifest(d.path(), "param,stress\n# c\n0.1,1.0\nabc,1.0\n", "");
        match load_dataset(&m) {
            Err(DatasetError::MalformedRow { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_monotone_and_duplicates_rejected() {
        let d = tempfile::tempdir().unwrap();
        for body in ["param,stress\n0.2,1\n0.1,2\n", "param,stress\n0.1,1\n0.1,2\n"] {
            let m = one_mode_manifest(d.path(), body, "");
            assert!(matches!(
                load_dataset(&m),
                Err(DatasetError::NonMonotoneParams(LoadingMode::SimpleShear))
            ));
        }
    }

    #[test]
    fn missing_files() {
        let d = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_dataset(d.path().join("nope.json")),
            Err(DatasetError::MissingFile(_))
        ));
        let m = write(
            d.path(),
            "m.json",
            r#"{"name":"t","unit":"MPa","modes":[{"mode":"equibiaxial","csv":"gone.csv"}]}"#,
        );
        assert!(matches!(load_dataset(&m), Err(DatasetError::MissingFile(_))));
    }

    #[test]
    fn bad_header_and_split_tags() {
        let d = tempfile::tempdir().unwrap();
        let m = one_mode_manifest(d.path(), "x,y\n0.1,1\n", "");
        assert!(matches!(load_dataset(&m), Err(DatasetError::MalformedRow { line: 1, .. })));
        let m = one_mode_manifest(d.path(), "param,stress\n0.1,1\n", r#","split":"column""#);
        assert!(matches!(load_dataset(&m), Err(DatasetError::MalformedRow { line: 1, .. })));
        let m = one_mode_manifest(
            d.path(),
            "param,stress,split\n0.1,1,train\n0.2,1,dev\n",
            r#","split":"column""#,
        );
        assert!(matches!(load_dataset(&m), Err(DatasetError::MalformedRow { line: 3, .. })));
    }

    #[test]
    fn split_views_partition_in_order() {
        let d = tempfile::tempdir().unwrap();
        let m = one_mode_manifest(
            d.path(),
            "param,stress,split\n0.1,1,train\n0.2,2,test\n0.3,3,train\n0.4,4,test\n",
            r#","split":"column""#,
        );
        let ds = load_dataset(&m).unwrap();
        let (train, test) = ds.train_test_split(true).unwrap();
        assert_eq!(train.len() + test.len(), ds.len());
        assert_eq!(train.modes[0].params(), vec![0.1, 0.3]);
        assert_eq!(test.modes[0].params(), vec![0.2, 0.4]);

        let m = one_mode_manifest(d.path(), "param,stress\n0.1,1\n", "");
        let ds = load_dataset(&m).unwrap();
        let (_, test) = ds.train_test_split(false).unwrap();
        assert!(test.is_empty());
        assert!(matches!(ds.train_test_split(true), Err(DatasetError::NoTestSamples)));
    }

    #[test]
    fn synthetic_generation_is_exact_and_deterministic() {
        let reference = reference_material();
        let params: Vec<f64> = linspace(1.0, 3.0, 11);
        let ds = generate_synthetic(
            &reference,
            "mr",
            StressUnit::MPa,
            &[(LoadingMode::UniaxialTension, params.clone())],
        )
        .unwrap();
        assert_eq!(ds.modes[0].samples[0].stress, 0.0);
        let pred = predict_curve(&reference, LoadingMode::UniaxialTension, &params).unwrap();
        assert_eq!(ds.modes[0].stresses(), pred);
        assert_eq!(ds.generator.as_ref().unwrap().name, "reference_mooney_rivlin");

        let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let p1 = write_dataset(&ds, d1.path()).unwrap();
        let p2 = write_dataset(&ds, d2.path()).unwrap();
        assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
        assert_eq!(
            fs::read(d1.path().join("uniaxial_tension.csv")).unwrap(),
            fs::read(d2.path().join("uniaxial_tension.csv")).unwrap()
        );
        assert_eq!(load_dataset(&p1).unwrap(), ds);
    }

    #[test]
    fn synthetic_generation_requires_canonical_reference() {
        let err = generate_synthetic(
            &sine_fixture(),
            "bad",
            StressUnit::MPa,
            &[(LoadingMode::UniaxialTension, vec![1.0, 2.0])],
        )
        .unwrap_err();
        assert!(matches!(err, DatasetError::NonCanonicalReference(s) if s.contains("ellipticity")));
    }

    #[test]
    fn plane_self_comparison_and_corners() {
        let truth = reference_material();
        let map = invariant_plane_eval(&truth, &truth, 3.0, 7).unwrap();
        assert_eq!(map.records.len(), 49);
        assert_eq!(map.max_rel_err(), 0.0);
        let lambdas = linspace(1.0, 3.0, 7);
        for (a, mode) in [
            (-0.5, LoadingMode::UniaxialTension),
            (0.0, LoadingMode::PureShear),
            (1.0, LoadingMode::Equibiaxial),
        ] {
            let row = map.row(a);
            assert_eq!(row.len(), 7, "a = {a}");
            let curve = predict_curve(&truth, mode, &lambdas).unwrap();
            for (r, c) in row.iter().zip(curve) {
                assert!((r.pred - c).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn plane_error_floor_at_reference_state() {
        let map = invariant_plane_eval(&neo_hookean(0.5), &reference_material(), 2.0, 4).unwrap();
        for r in map.records.iter().filter(|r| r.lambda1 == 1.0) {
            assert_eq!(r.rel_err, 0.0);
        }
        assert!(map.max_rel_err() > 0.0);
        assert!(invariant_plane_eval(&neo_hookean(0.5), &neo_hookean(0.5), 1.0, 4).is_err());
        assert!(invariant_plane_eval(&neo_hookean(0.5), &neo_hookean(0.5), 2.0, 1).is_err());
    }

    #[test]
    fn plane_csv_shape() {
        let truth = reference_material();
        let csv = invariant_plane_eval(&truth, &truth, 3.0, 5).unwrap().to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 26);
        assert_eq!(lines[0], "λ1,a,I1,I2,pred,truth,rel_err");
    }
}
