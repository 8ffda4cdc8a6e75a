//! JSON wire formats. Series are coefficient lists; `p` and `precision` live on the enclosing object.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::chain_complex::{ChainComplex, ChainMap, Generator, Grading};
use crate::coeff_ring::TruncatedSeries;
use crate::colimit::SlopeDiagram;
use crate::dg_nerve::FunctorData;
use crate::error::{Error, Result};
use crate::fg_module::SeriesMatrix;
use crate::linear_model::{IsotopyFamily, IsotopySpec, LinearIsotopy};

pub const DEFAULT_PRECISION: usize = 16;
pub const PRECISION_ENV: &str = "XTORSION_PRECISION";

/// The default precision, overridden by `XTORSION_PRECISION`.
pub fn default_precision() -> Result<usize> {
    match std::env::var(PRECISION_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(Error::Input(format!("{PRECISION_ENV}={v:?} is not a positive integer"))),
        },
        Err(_) => Ok(DEFAULT_PRECISION),
    }
}

pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

pub fn series_to_wire(s: &TruncatedSeries) -> Vec<i64> {
    let c = s.coeffs();
    let len = c.iter().rposition(|&v| v != 0).map_or(0, |i| i + 1);
    c[..len].iter().map(|&v| v as i64).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<usize>,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<Vec<i64>>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &SeriesMatrix) -> Self {
        let entries = (0..m.rows()).map(|r| (0..m.cols()).map(|c| series_to_wire(&m[(r, c)])).collect()).collect();
        MatrixJson { p: Some(m.modulus()), precision: Some(m.precision()), rows: m.rows(), cols: m.cols(), entries }
    }

    /// Decodes over `F_p[[x]]/(x^precision)`; fields on the object itself must agree.
    pub fn to_matrix(&self, p: u32, precision: usize) -> Result<SeriesMatrix> {
        if self.p.is_some_and(|q| q != p) || self.precision.is_some_and(|n| n != precision) {
            return Err(Error::Input(format!(
                "matrix over p = {:?}, precision {:?} inside an object over p = {p}, precision {precision}",
                self.p, self.precision
            )));
        }
        if self.entries.len() != self.rows || self.entries.iter().any(|r| r.len() != self.cols) {
            return Err(Error::Input(format!("entries do not form a {}x{} grid", self.rows, self.cols)));
        }
        if self.rows == 0 || self.cols == 0 {
            return Ok(SeriesMatrix::zeros(self.rows, self.cols, p, precision));
        }
        SeriesMatrix::from_coeff_grid(&self.entries, p, precision)
    }

    fn standalone(&self, default_precision: usize) -> Result<SeriesMatrix> {
        let p = self.p.ok_or_else(|| Error::Input("matrix needs a field p".into()))?;
        self.to_matrix(p, self.precision.unwrap_or(default_precision))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub p: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<usize>,
    #[serde(default)]
    pub grading: Grading,
    pub generators: Vec<Generator>,
    pub differential: MatrixJson,
}

impl ComplexJson {
    pub fn from_complex(c: &ChainComplex) -> Self {
        ComplexJson {
            p: c.modulus(),
            precision: Some(c.precision()),
            grading: c.grading(),
            generators: c.generators().to_vec(),
            differential: MatrixJson::from_matrix(c.differential()),
        }
    }

    pub fn to_complex(&self, default_precision: usize) -> Result<ChainComplex> {
        let n = self.precision.unwrap_or(default_precision);
        let d = self.differential.to_matrix(self.p, n)?;
        ChainComplex::new(self.generators.clone(), d, self.grading)
    }
}

fn series_list(v: &[Vec<i64>], p: u32, n: usize) -> Result<Vec<TruncatedSeries>> {
    v.iter().map(|c| TruncatedSeries::from_coeffs(c, p, n)).collect()
}

/// Input of `cone`: two complexes and a degree-0 map between them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeJson {
    pub source: ComplexJson,
    pub target: ComplexJson,
    pub map: MatrixJson,
}

impl ConeJson {
    pub fn to_map(&self, default_precision: usize) -> Result<ChainMap> {
        let source = self.source.to_complex(default_precision)?;
        let target = self.target.to_complex(default_precision)?;
        let m = self.map.to_matrix(source.modulus(), source.precision())?;
        ChainMap::new(source, target, 0, m)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplexMapJson {
    pub simplex: Vec<usize>,
    pub matrix: MatrixJson,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctorDataJson {
    pub complexes: Vec<ComplexJson>,
    pub maps: Vec<SimplexMapJson>,
}

impl FunctorDataJson {
    pub fn from_data(d: &FunctorData) -> Self {
        FunctorDataJson {
            complexes: d.complexes.iter().map(ComplexJson::from_complex).collect(),
            maps: d
                .maps
                .iter()
                .map(|(s, m)| SimplexMapJson { simplex: s.clone(), matrix: MatrixJson::from_matrix(m) })
                .collect(),
        }
    }

    pub fn to_data(&self, default_precision: usize) -> Result<FunctorData> {
        let complexes = self.complexes.iter().map(|c| c.to_complex(default_precision)).collect::<Result<Vec<_>>>()?;
        let first = complexes.first().ok_or_else(|| Error::Input("functor data lists no complexes".into()))?;
        let (p, n) = (first.modulus(), first.precision());
        let mut maps = BTreeMap::new();
        for m in &self.maps {
            if maps.insert(m.simplex.clone(), m.matrix.to_matrix(p, n)?).is_some() {
                return Err(Error::Input(format!("simplex {:?} listed twice", m.simplex)));
            }
        }
        FunctorData::new(complexes, maps)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramJson {
    pub slopes: Vec<f64>,
    pub complexes: Vec<ComplexJson>,
    pub maps: Vec<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<Vec<Vec<i64>>>,
}

impl DiagramJson {
    pub fn from_diagram(d: &SlopeDiagram) -> Self {
        DiagramJson {
            slopes: d.slopes().to_vec(),
            complexes: d.complexes().iter().map(ComplexJson::from_complex).collect(),
            maps: d.maps().iter().map(|m| MatrixJson::from_matrix(&m.matrix)).collect(),
            unit: d.unit().map(|u| u.iter().map(series_to_wire).collect()),
        }
    }

    pub fn to_diagram(&self, default_precision: usize) -> Result<SlopeDiagram> {
        let complexes = self.complexes.iter().map(|c| c.to_complex(default_precision)).collect::<Result<Vec<_>>>()?;
        let first = complexes.first().ok_or_else(|| Error::Input("diagram lists no complexes".into()))?;
        let (p, n) = (first.modulus(), first.precision());
        if self.maps.len() + 1 != complexes.len() {
            return Err(Error::Input(format!("{} maps for {} complexes", self.maps.len(), complexes.len())));
        }
        let maps = self
            .maps
            .iter()
            .enumerate()
            .map(|(i, m)| ChainMap::new(complexes[i].clone(), complexes[i + 1].clone(), 0, m.to_matrix(p, n)?))
            .collect::<Result<Vec<_>>>()?;
        let unit = self.unit.as_ref().map(|u| series_list(u, p, n)).transpose()?;
        SlopeDiagram::new(self.slopes.clone(), complexes, maps, unit)
    }
}

/// A 1-simplex of isotopies, `s ∈ [0, 1] ↦ σ_s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum FamilySpec {
    /// `R_{(from + s(to − from))t}` on `C^n`.
    Reeb { n: usize, from: f64, to: f64 },
    /// Diagonal rotations with linearly interpolated speeds.
    Diagonal { from: Vec<f64>, to: Vec<f64> },
    Constant { isotopy: IsotopySpec },
}

impl FamilySpec {
    pub fn to_family(&self) -> Result<IsotopyFamily> {
        match self {
            FamilySpec::Reeb { n, from, to } => Ok(IsotopyFamily::reeb_segment(*n, *from, *to)),
            FamilySpec::Diagonal { from, to } => {
                if from.len() != to.len() || from.is_empty() {
                    return Err(Error::Input(format!("diagonal family with {} and {} speeds", from.len(), to.len())));
                }
                Ok(IsotopyFamily::diagonal_segment(from.clone(), to.clone()))
            }
            FamilySpec::Constant { isotopy } => Ok(IsotopyFamily::constant(LinearIsotopy::from_spec(isotopy)?)),
        }
    }
}

/// Input of `compose`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComposeJson {
    pub simplices: Vec<FamilySpec>,
}

/// A free-standing matrix, as used by `in_image` style queries.
pub fn matrix_from_json(text: &str, default_precision: usize) -> Result<SeriesMatrix> {
    parse::<MatrixJson>(text)?.standalone(default_precision)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain_complex::homology;
    use crate::dg_nerve::random_triangle;
    use crate::gen;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn complexes_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for p in [2, 3, 5] {
            let c = gen::random_complex(&mut rng, p, 8, 5).complex;
            let text = serde_json::to_string(&ComplexJson::from_complex(&c)).unwrap();
            let back = parse::<ComplexJson>(&text).unwrap().to_complex(16).unwrap();
            assert_eq!(back, c);
            assert_eq!(homology(&back), homology(&c));
        }
    }

    #[test]
    fn functor_data_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = random_triangle(&mut rng, 3, 6, 3).unwrap().functor_data().unwrap();
        let text = serde_json::to_string(&FunctorDataJson::from_data(&d)).unwrap();
        assert_eq!(parse::<FunctorDataJson>(&text).unwrap().to_data(16).unwrap(), d);
    }

    #[test]
    fn precision_defaults_and_conflicts() {
        let text = r#"{"p": 2, "generators": [{"label": "a", "degree": 0}, {"label": "b", "degree": 1}],
            "differential": {"rows": 2, "cols": 2, "entries": [[[], [0, 1]], [[], []]]}}"#;
        let c = parse::<ComplexJson>(text).unwrap().to_complex(5).unwrap();
        assert_eq!(c.precision(), 5);
        assert_eq!(homology(&c).even.torsion, vec![1]);
        let bad = text.replace("\"rows\": 2", "\"p\": 3, \"rows\": 2");
        assert!(matches!(parse::<ComplexJson>(&bad).unwrap().to_complex(5), Err(Error::Input(_))));
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = parse::<ComplexJson>("{\n  \"p\": 2,\n  \"generators\": [}").unwrap_err();
        match err {
            Error::Input(msg) => assert!(msg.contains("line 3"), "{msg}"),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn diagram_round_trip() {
        let c = ComplexJson {
            p: 3,
            precision: Some(4),
            grading: Grading::Z2,
            generators: vec![Generator::new("g", 0)],
            differential: MatrixJson { p: None, precision: None, rows: 1, cols: 1, entries: vec![vec![vec![]]] },
        };
        let id = MatrixJson { p: None, precision: None, rows: 1, cols: 1, entries: vec![vec![vec![0, 1]]] };
        let wire = DiagramJson { slopes: vec![0.0, 1.0], complexes: vec![c.clone(), c], maps: vec![id], unit: Some(vec![vec![1]]) };
        let d = wire.to_diagram(16).unwrap();
        let again = DiagramJson::from_diagram(&d).to_diagram(16).unwrap();
        assert_eq!(again.maps(), d.maps());
    }

    #[test]
    fn family_specs_parse() {
        let text = r#"{"simplices": [{"type": "reeb", "n": 2, "from": 0.1, "to": 0.4},
            {"type": "constant", "isotopy": {"segments": [{"type": "exp", "S": [[1,0],[0,1]], "duration": 0.5}]}}]}"#;
        let c = parse::<ComposeJson>(text).unwrap();
        let fams: Vec<_> = c.simplices.iter().map(|f| f.to_family().unwrap()).collect();
        assert_eq!(fams[0].n(), 2);
        assert_eq!(fams[1].n(), 1);
        let bad = r#"{"type": "diagonal", "from": [0.1], "to": []}"#;
        assert!(matches!(parse::<FamilySpec>(bad).unwrap().to_family(), Err(Error::Input(_))));
    }
}
