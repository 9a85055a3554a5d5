//! The JSON input document: a fan, an optional bundle and an optional polarization.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::exactla::{format_rational, parse_rational, QVector, Rational, Subspace};
use crate::fan::Fan;
use crate::klyachko::{Filtration, ToricBundle};
use crate::stability::{validate_polarization, weights_from_divisor, Polarization};

pub const SCHEMA_VERSION: u32 = 1;

/// A rational written as a JSON integer or a `"p/q"` string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Q(pub Rational);

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Q;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an integer or a \"p/q\" string")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Q, E> {
                Ok(Q(Rational::from_integer(v.into())))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Q, E> {
                Ok(Q(Rational::from_integer(v.into())))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Q, E> {
                parse_rational(v).map(Q).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FanBlock {
    pub dim: usize,
    pub rays: Vec<Vec<i64>>,
    pub max_cones: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Space {
    Named(SpaceKeyword),
    Rows(Vec<Vec<Q>>),
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKeyword {
    Full,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct StepBlock {
    pub max_j: i64,
    pub space: Space,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FiltrationBlock {
    pub steps: Vec<StepBlock>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct NamedVector {
    pub name: String,
    pub vector: Vec<Q>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BundleBlock {
    pub rank: usize,
    pub filtrations: Vec<FiltrationBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_names: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub named_vectors: Vec<NamedVector>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum PolarizationBlock {
    Weights(Vec<Q>),
    Divisor(Vec<Q>),
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BundleDocument {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub fan: FanBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bundle: Option<BundleBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polarization: Option<PolarizationBlock>,
}

/// A problem with the input, located by a JSON path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DocError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for DocError {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        if self.path.is_empty() || self.path == "." {
            write!(f, "{}", self.message)
        } else {
            write!(f, "at {}: {}", self.path, self.message)
        }
    }
}

fn located(path: impl Into<String>, message: impl fmt::Display) -> DocError {
    DocError {
        path: path.into(),
        message: message.to_string(),
    }
}

/// Parses and schema-checks the text; semantic checks happen in [`Input::from_document`].
pub fn parse(text: &str) -> Result<BundleDocument, Vec<DocError>> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: BundleDocument = serde_path_to_error::deserialize(de)
        .map_err(|e| vec![located(e.path().to_string(), e.inner())])?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(vec![located(
            "schema_version",
            format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                doc.schema_version
            ),
        )]);
    }
    Ok(doc)
}

/// The validated objects behind a document.
#[derive(Clone, Debug)]
pub struct Input {
    pub fan: Fan,
    pub bundle: Option<ToricBundle>,
    pub polarization: Option<Polarization>,
}

/// Larger fibers are out of reach for exact flat enumeration anyway.
pub const MAX_RANK: usize = 64;

fn rows_of(v: &[Vec<Q>]) -> Vec<QVector> {
    v.iter()
        .map(|r| r.iter().map(|q| q.0.clone()).collect())
        .collect()
}

fn build_filtration(rank: usize, fb: &FiltrationBlock, path: &str) -> Result<Filtration, DocError> {
    let mut steps = Vec::with_capacity(fb.steps.len());
    for (k, s) in fb.steps.iter().enumerate() {
        let space = match &s.space {
            Space::Named(SpaceKeyword::Full) => Subspace::full(rank),
            Space::Rows(rows) => {
                if let Some(r) = rows.iter().position(|r| r.len() != rank) {
                    return Err(located(
                        format!("{path}.steps[{k}].space[{r}]"),
                        format!("expected {rank} entries, found {}", rows[r].len()),
                    ));
                }
                Subspace::span(&rows_of(rows), rank)
                    .map_err(|e| located(format!("{path}.steps[{k}].space"), e))?
            }
        };
        steps.push((s.max_j, space));
    }
    Filtration::new(rank, steps).map_err(|e| located(format!("{path}.steps"), e))
}

impl Input {
    pub fn from_document(doc: &BundleDocument) -> Result<Input, Vec<DocError>> {
        let fb = &doc.fan;
        let fan = Fan::new(fb.dim, fb.rays.clone(), fb.max_cones.clone())
            .map_err(|e| vec![located("fan", e)])?;
        let report = fan.validate();
        if !report.pass {
            return Err(report
                .failures()
                .into_iter()
                .map(|m| located("fan", m))
                .collect());
        }

        let bundle = match &doc.bundle {
            None => None,
            Some(bb) => {
                let mut errors = Vec::new();
                if bb.filtrations.len() != fan.num_rays() {
                    errors.push(located(
                        "bundle.filtrations",
                        format!(
                            "{} filtrations for {} rays",
                            bb.filtrations.len(),
                            fan.num_rays()
                        ),
                    ));
                }
                if bb.rank == 0 || bb.rank > MAX_RANK {
                    errors.push(located(
                        "bundle.rank",
                        format!("rank must be between 1 and {MAX_RANK}, found {}", bb.rank),
                    ));
                    return Err(errors);
                }
                let mut filtrations = Vec::new();
                for (i, f) in bb.filtrations.iter().enumerate() {
                    match build_filtration(bb.rank, f, &format!("bundle.filtrations[{i}]")) {
                        Ok(f) => filtrations.push(f),
                        Err(e) => errors.push(e),
                    }
                }
                if !errors.is_empty() {
                    return Err(errors);
                }
                let mut b = ToricBundle::new(fan.clone(), filtrations)
                    .map_err(|e| vec![located("bundle", e)])?;
                if let Some(names) = &bb.basis_names {
                    b = b
                        .with_basis_names(names.clone())
                        .map_err(|e| vec![located("bundle.basis_names", e)])?;
                }
                if !bb.named_vectors.is_empty() {
                    for (k, nv) in bb.named_vectors.iter().enumerate() {
                        if nv.vector.len() != bb.rank {
                            return Err(vec![located(
                                format!("bundle.named_vectors[{k}].vector"),
                                format!("expected {} entries, found {}", bb.rank, nv.vector.len()),
                            )]);
                        }
                    }
                    let named = bb
                        .named_vectors
                        .iter()
                        .map(|nv| {
                            (
                                nv.name.clone(),
                                nv.vector.iter().map(|q| q.0.clone()).collect(),
                            )
                        })
                        .collect();
                    b = b
                        .with_named_vectors(named)
                        .map_err(|e| vec![located("bundle.named_vectors", e)])?;
                }
                Some(b)
            }
        };

        let polarization = match &doc.polarization {
            None => None,
            Some(PolarizationBlock::Weights(w)) => {
                let t: Vec<Rational> = w.iter().map(|q| q.0.clone()).collect();
                Some(
                    validate_polarization(&fan, &t)
                        .map_err(|e| vec![located("polarization.weights", e)])?,
                )
            }
            Some(PolarizationBlock::Divisor(a)) => {
                let a: Vec<Rational> = a.iter().map(|q| q.0.clone()).collect();
                Some(
                    weights_from_divisor(&fan, &a)
                        .map_err(|e| vec![located("polarization.divisor", e)])?,
                )
            }
        };
        Ok(Input {
            fan,
            bundle,
            polarization,
        })
    }
}

/// Parses a document and builds its objects.
pub fn load(text: &str) -> Result<Input, Vec<DocError>> {
    Input::from_document(&parse(text)?)
}

/// Serializes a bundle back into document form.
pub fn document_of(b: &ToricBundle, polarization: Option<&Polarization>) -> BundleDocument {
    let fan = b.fan();
    let rank = b.rank();
    let filtrations = b
        .filtrations()
        .iter()
        .map(|f| FiltrationBlock {
            steps: f
                .steps()
                .iter()
                .map(|(a, v)| StepBlock {
                    max_j: *a,
                    space: if v.is_full() {
                        Space::Named(SpaceKeyword::Full)
                    } else {
                        Space::Rows(
                            v.basis()
                                .iter()
                                .map(|r| r.iter().cloned().map(Q).collect())
                                .collect(),
                        )
                    },
                })
                .collect(),
        })
        .collect();
    let default_names: Vec<String> = (1..=rank).map(|i| format!("e{i}")).collect();
    BundleDocument {
        schema_version: SCHEMA_VERSION,
        description: None,
        fan: FanBlock {
            dim: fan.dim(),
            rays: fan.rays().to_vec(),
            max_cones: fan.max_cones().to_vec(),
        },
        bundle: Some(BundleBlock {
            rank,
            filtrations,
            basis_names: (b.basis_names() != default_names.as_slice())
                .then(|| b.basis_names().to_vec()),
            named_vectors: b
                .named_vectors()
                .iter()
                .map(|(n, v)| NamedVector {
                    name: n.clone(),
                    vector: v.iter().cloned().map(Q).collect(),
                })
                .collect(),
        }),
        polarization: polarization
            .map(|p| PolarizationBlock::Weights(p.weights.iter().cloned().map(Q).collect())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::{qvec, ratio};
    use crate::klyachko::tests::{rank3, tp2};

    const TP2: &str = r#"{
        "schema_version": 1,
        "fan": {"dim": 2, "rays": [[-1, -1], [1, 0], [0, 1]], "max_cones": [[0, 1], [1, 2], [0, 2]]},
        "bundle": {
            "rank": 2,
            "filtrations": [
                {"steps": [{"max_j": 0, "space": "full"}, {"max_j": 1, "space": [[-1, -1]]}]},
                {"steps": [{"max_j": 0, "space": "full"}, {"max_j": 1, "space": [[1, 0]]}]},
                {"steps": [{"max_j": 0, "space": "full"}, {"max_j": 1, "space": [[0, 1]]}]}
            ]
        },
        "polarization": {"weights": [1, "1", "2/2"]}
    }"#;

    #[test]
    fn parses_tangent_plane() {
        let input = load(TP2).unwrap();
        let b = input.bundle.unwrap();
        assert_eq!(b.filtrations(), tp2().filtrations());
        assert_eq!(input.polarization.unwrap().weights, qvec(&[1, 1, 1]));
    }

    #[test]
    fn rationals() {
        let q: Q = serde_json::from_str("\"-3/6\"").unwrap();
        assert_eq!(q.0, ratio(-1, 2));
        assert!(serde_json::from_str::<Q>("1.5").is_err());
        let bad = TP2.replace("\"2/2\"", "\"1/0\"");
        let err = &parse(&bad).unwrap_err()[0];
        assert_eq!(err.path, "polarization.weights[2]");
    }

    #[test]
    fn unknown_fields_and_versions() {
        let typo = TP2.replace("\"max_cones\"", "\"max_cone\"");
        assert!(parse(&typo).is_err());
        let extra = TP2.replace("\"rank\": 2,", "\"rank\": 2, \"ranks\": 2,");
        assert_eq!(parse(&extra).unwrap_err()[0].path, "bundle.ranks");
        let v2 = TP2.replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert_eq!(parse(&v2).unwrap_err()[0].path, "schema_version");
    }

    #[test]
    fn semantic_errors_are_located() {
        let bad = TP2.replace(
            r#"{"max_j": 0, "space": "full"}, {"max_j": 1, "space": [[1, 0]]}"#,
            r#"{"max_j": 1, "space": "full"}, {"max_j": 1, "space": [[1, 0]]}"#,
        );
        let errs = load(&bad).unwrap_err();
        assert_eq!(errs[0].path, "bundle.filtrations[1].steps");
        let short = TP2.replace("[[0, 1]]", "[[0, 1, 2]]");
        assert_eq!(
            load(&short).unwrap_err()[0].path,
            "bundle.filtrations[2].steps[1].space[0]"
        );
        let ray = TP2.replace("[[-1, -1], [1, 0], [0, 1]]", "[[-2, -2], [1, 0], [0, 1]]");
        assert_eq!(load(&ray).unwrap_err()[0].path, "fan");
        let unbalanced = TP2.replace(r#"[1, "1", "2/2"]"#, "[1, 1, 2]");
        assert_eq!(
            load(&unbalanced).unwrap_err()[0].path,
            "polarization.weights"
        );
    }

    #[test]
    fn round_trip() {
        for b in [tp2(), rank3()] {
            let doc = document_of(&b, None);
            let text = serde_json::to_string(&doc).unwrap();
            let back = load(&text).unwrap().bundle.unwrap();
            assert_eq!(back.filtrations(), b.filtrations());
            assert_eq!(back.basis_names(), b.basis_names());
        }
    }
}
