//! Machine-readable reports and their text rendering.

use std::cmp::Ordering;
use std::fmt::Write;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactla::{format_rational, Rational, Subspace};
use crate::fan::{Fan, FanReport};
use crate::klyachko::{CharacterSheet, Filtration, ToricBundle};
use crate::matroid::{GroundSet, SubspaceLattice};
use crate::parliament::{HPolytope, Parliament};
use crate::stability::{FlatSlope, Polarization, PolarizationSource, Restriction, StabilityReport};

use super::document::SCHEMA_VERSION;

pub fn q(x: &Rational) -> String {
    format_rational(x)
}

pub fn qv(v: &[Rational]) -> Vec<String> {
    v.iter().map(q).collect()
}

pub fn int(x: &BigInt) -> Result<i64> {
    i64::try_from(x).map_err(|_| Error::Unsupported(format!("{x} does not fit in 64 bits")))
}

pub fn ints(v: &[BigInt]) -> Result<Vec<i64>> {
    v.iter().map(int).collect()
}

fn tuple<T: ToString>(v: &[T]) -> String {
    let parts: Vec<String> = v.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(", "))
}

fn braces(labels: &[String]) -> String {
    format!("{{{}}}", labels.join(", "))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolytopeReport {
    /// `(ray index, bound)` pairs.
    pub bounds: Vec<(usize, String)>,
    pub vertices: Vec<Vec<String>>,
    pub empty: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice_points: Option<Vec<Vec<i64>>>,
}

impl PolytopeReport {
    pub fn new(p: &HPolytope, with_points: bool) -> Result<Self> {
        Ok(PolytopeReport {
            bounds: p.bounds().iter().map(q).enumerate().collect(),
            vertices: p.vertices().iter().map(|v| qv(v)).collect(),
            empty: p.is_empty(),
            lattice_points: match with_points.then(|| p.bounded_lattice_points()) {
                Some(Ok(pts)) => Some(pts.iter().map(|u| ints(u)).collect::<Result<_>>()?),
                _ => None,
            },
        })
    }

    fn text(&self) -> String {
        let bounds: Vec<&str> = self.bounds.iter().map(|(_, c)| c.as_str()).collect();
        let mut s = format!("bounds {}", tuple(&bounds));
        if self.empty {
            s.push_str("; empty");
        } else {
            let verts: Vec<String> = self.vertices.iter().map(|v| tuple(v)).collect();
            write!(s, "; vertices {}", verts.join(", ")).unwrap();
        }
        if let Some(pts) = &self.lattice_points {
            let pts: Vec<String> = pts.iter().map(|p| tuple(p)).collect();
            write!(
                s,
                "; lattice points {}",
                if pts.is_empty() {
                    "none".into()
                } else {
                    pts.join(", ")
                }
            )
            .unwrap();
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolarizationReport {
    pub weights: Vec<String>,
    pub source: PolarizationSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divisor: Option<Vec<String>>,
}

impl PolarizationReport {
    pub fn new(p: &Polarization) -> Self {
        PolarizationReport {
            weights: qv(&p.weights),
            source: p.source.clone(),
            divisor: p.divisor.as_deref().map(qv),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Less,
    Equal,
    Greater,
}

impl From<Ordering> for Relation {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Less => Relation::Less,
            Ordering::Equal => Relation::Equal,
            Ordering::Greater => Relation::Greater,
        }
    }
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Less => "<",
            Relation::Equal => "=",
            Relation::Greater => ">",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlatReport {
    pub indices: Vec<usize>,
    pub labels: Vec<String>,
    pub rank: usize,
    pub slope: String,
    pub relation: Relation,
    pub average_polytope: PolytopeReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundElement {
    pub label: String,
    pub vector: Vec<String>,
    /// The lattice element at whose step the vector was added.
    pub step: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineReport {
    pub character: Vec<i64>,
    pub profile: Vec<i64>,
    pub vector: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeSheet {
    pub cone: usize,
    pub rays: Vec<usize>,
    pub lines: Vec<LineReport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trace {
    /// `L(E)`, each element by its echelon basis.
    pub lattice: Vec<Vec<Vec<String>>>,
    pub ground_set: Vec<GroundElement>,
    pub characters: Vec<ConeSheet>,
}

fn basis_rows(s: &Subspace) -> Vec<Vec<String>> {
    s.basis().iter().map(|r| qv(r)).collect()
}

pub fn ground_elements(b: &ToricBundle, g: &GroundSet) -> Vec<GroundElement> {
    g.vectors()
        .iter()
        .zip(g.step_trace())
        .map(|(v, s)| GroundElement {
            label: b.label(v),
            vector: qv(v),
            step: basis_rows(s),
        })
        .collect()
}

impl Trace {
    pub fn new(
        b: &ToricBundle,
        lattice: &SubspaceLattice,
        g: &GroundSet,
        sheet: &CharacterSheet,
    ) -> Result<Self> {
        let characters = sheet
            .cones
            .iter()
            .map(|c| {
                Ok(ConeSheet {
                    cone: c.cone,
                    rays: b.fan().max_cones()[c.cone].clone(),
                    lines: c
                        .lines
                        .iter()
                        .map(|l| {
                            Ok(LineReport {
                                character: ints(&l.character)?,
                                profile: l.profile.clone(),
                                vector: qv(&l.vector),
                            })
                        })
                        .collect::<Result<_>>()?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Trace {
            lattice: lattice.elements().iter().map(basis_rows).collect(),
            ground_set: ground_elements(b, g),
            characters,
        })
    }

    fn text(&self, out: &mut String) {
        out.push_str("trace:\n  L(E):\n");
        for rows in &self.lattice {
            let rows: Vec<String> = rows.iter().map(|r| tuple(r)).collect();
            writeln!(out, "    <{}>", rows.join(", ")).unwrap();
        }
        out.push_str("  ground set:\n");
        for (i, e) in self.ground_set.iter().enumerate() {
            let step: Vec<String> = e.step.iter().map(|r| tuple(r)).collect();
            writeln!(
                out,
                "    {i}: {} = {} at step <{}>",
                e.label,
                tuple(&e.vector),
                step.join(", ")
            )
            .unwrap();
        }
        out.push_str("  characters:\n");
        for c in &self.characters {
            let lines: Vec<String> = c
                .lines
                .iter()
                .map(|l| format!("{} on {}", tuple(&l.character), tuple(&l.vector)))
                .collect();
            writeln!(
                out,
                "    cone {} {:?}: {}",
                c.cone,
                c.rays,
                lines.join(", ")
            )
            .unwrap();
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckReport {
    pub schema_version: u32,
    pub polarization: PolarizationReport,
    pub mu: String,
    /// Absent with `--semistable-only`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stable: Option<bool>,
    pub semistable: bool,
    pub average_polytope: PolytopeReport,
    pub flats: Vec<FlatReport>,
    pub witness: Option<FlatReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Trace>,
}

fn flat_report(b: &ToricBundle, f: &FlatSlope) -> Result<FlatReport> {
    let avg = crate::parliament::average_polytope(b, &f.flat.span)?;
    Ok(FlatReport {
        indices: f.flat.indices.clone(),
        labels: f.labels.clone(),
        rank: f.flat.rank(),
        slope: q(&f.slope),
        relation: f.relation.into(),
        average_polytope: PolytopeReport::new(&avg, false)?,
    })
}

impl CheckReport {
    pub fn new(
        b: &ToricBundle,
        pol: &Polarization,
        r: &StabilityReport,
        semistable_only: bool,
        trace: Option<Trace>,
    ) -> Result<Self> {
        let avg = crate::parliament::average_polytope(b, &Subspace::full(b.rank()))?;
        Ok(CheckReport {
            schema_version: SCHEMA_VERSION,
            polarization: PolarizationReport::new(pol),
            mu: q(&r.mu),
            stable: (!semistable_only).then_some(r.stable),
            semistable: r.semistable,
            average_polytope: PolytopeReport::new(&avg, false)?,
            flats: r
                .flat_slopes
                .iter()
                .map(|f| flat_report(b, f))
                .collect::<Result<_>>()?,
            witness: r.witness.as_ref().map(|f| flat_report(b, f)).transpose()?,
            trace,
        })
    }

    pub fn headline(&self) -> String {
        let verdict = match (self.stable, self.semistable) {
            (Some(true), _) => "STABLE",
            (Some(false), true) => "SEMISTABLE (not stable)",
            (None, true) => "SEMISTABLE",
            (_, false) => "NOT SEMISTABLE",
        };
        let tail = match &self.witness {
            Some(w) => format!("max flat slope {}", w.slope),
            None => "no proper flats".to_string(),
        };
        format!("{verdict}, μ(E)={}, {tail}", self.mu)
    }

    pub fn text(&self) -> String {
        let mut s = self.headline();
        s.push('\n');
        writeln!(s, "weights: {}", tuple(&self.polarization.weights)).unwrap();
        writeln!(s, "average polytope of E: {}", self.average_polytope.text()).unwrap();
        for f in &self.flats {
            writeln!(
                s,
                "flat {}: rank {}, slope {} {} μ(E); {}",
                braces(&f.labels),
                f.rank,
                f.slope,
                f.relation.symbol(),
                f.average_polytope.text()
            )
            .unwrap();
        }
        if let Some(w) = &self.witness {
            writeln!(s, "witness: {} (slope {})", braces(&w.labels), w.slope).unwrap();
        }
        if let Some(t) = &self.trace {
            t.text(&mut s);
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryReport {
    pub label: String,
    pub vector: Vec<String>,
    pub polytope: PolytopeReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationReport {
    pub character: Vec<i64>,
    pub label: String,
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentReport {
    pub label: String,
    pub from: Vec<i64>,
    pub to: Vec<i64>,
    pub degree: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParliamentReport {
    pub schema_version: u32,
    pub entries: Vec<EntryReport>,
    /// Per maximal cone, in cone order.
    pub annotations: Vec<Vec<AnnotationReport>>,
    pub globally_generated: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_segments: Option<Vec<SegmentReport>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Trace>,
}

pub fn segments(r: &Restriction) -> Result<Vec<SegmentReport>> {
    r.pairs
        .iter()
        .map(|p| {
            Ok(SegmentReport {
                label: p.label.clone(),
                from: ints(&p.u)?,
                to: ints(&p.u_prime)?,
                degree: p.degree,
            })
        })
        .collect()
}

impl ParliamentReport {
    pub fn new(p: &Parliament, wall: Option<&Restriction>, trace: Option<Trace>) -> Result<Self> {
        Ok(ParliamentReport {
            schema_version: SCHEMA_VERSION,
            entries: p
                .entries
                .iter()
                .map(|e| {
                    Ok(EntryReport {
                        label: e.label.clone(),
                        vector: qv(&e.vector),
                        polytope: PolytopeReport::new(&e.polytope, true)?,
                    })
                })
                .collect::<Result<_>>()?,
            annotations: p
                .annotations
                .iter()
                .map(|cone| {
                    cone.iter()
                        .map(|a| {
                            Ok(AnnotationReport {
                                character: ints(&a.character)?,
                                label: a.label.clone(),
                                flagged: a.flagged,
                            })
                        })
                        .collect::<Result<_>>()
                })
                .collect::<Result<_>>()?,
            globally_generated: p.globally_generated,
            wall_segments: wall.map(segments).transpose()?,
            svg: None,
            trace,
        })
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            writeln!(s, "P_{}: {}", e.label, e.polytope.text()).unwrap();
        }
        for (c, notes) in self.annotations.iter().enumerate() {
            let parts: Vec<String> = notes
                .iter()
                .map(|a| {
                    format!(
                        "{} -> {}{}",
                        tuple(&a.character),
                        a.label,
                        if a.flagged { " (flagged)" } else { "" }
                    )
                })
                .collect();
            writeln!(s, "cone {c}: {}", parts.join(", ")).unwrap();
        }
        if let Some(segs) = &self.wall_segments {
            for g in segs {
                writeln!(
                    s,
                    "segment {}: {} -- {} (degree {})",
                    g.label,
                    tuple(&g.from),
                    tuple(&g.to),
                    g.degree
                )
                .unwrap();
            }
        }
        writeln!(
            s,
            "globally generated: {}",
            if self.globally_generated { "yes" } else { "no" }
        )
        .unwrap();
        if let Some(path) = &self.svg {
            writeln!(s, "svg written to {path}").unwrap();
        }
        if let Some(t) = &self.trace {
            t.text(&mut s);
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlatEntry {
    pub indices: Vec<usize>,
    pub labels: Vec<String>,
    pub rank: usize,
    pub compatible: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlatsReport {
    pub schema_version: u32,
    pub ground_set: Vec<GroundElement>,
    pub flats: Vec<FlatEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Trace>,
}

impl FlatsReport {
    pub fn text(&self) -> String {
        let mut s = String::new();
        let labels: Vec<String> = self.ground_set.iter().map(|e| e.label.clone()).collect();
        writeln!(s, "ground set ({}): {}", labels.len(), braces(&labels)).unwrap();
        for f in &self.flats {
            writeln!(
                s,
                "flat {}: rank {}, {}",
                braces(&f.labels),
                f.rank,
                if f.compatible {
                    "compatible"
                } else {
                    "not compatible"
                }
            )
            .unwrap();
        }
        if let Some(t) = &self.trace {
            t.text(&mut s);
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RestrictReport {
    pub schema_version: u32,
    pub wall: usize,
    pub tau_rays: Vec<usize>,
    pub sigma: usize,
    pub sigma_prime: usize,
    pub m_tau: Vec<i64>,
    pub degrees: Vec<i64>,
    pub c1_degree: i64,
    pub semistable: bool,
    pub segments: Vec<SegmentReport>,
}

impl RestrictReport {
    pub fn new(index: usize, r: &Restriction) -> Result<Self> {
        Ok(RestrictReport {
            schema_version: SCHEMA_VERSION,
            wall: index,
            tau_rays: r.wall.tau_rays.clone(),
            sigma: r.wall.sigma,
            sigma_prime: r.wall.sigma_prime,
            m_tau: ints(&r.m_tau)?,
            degrees: r.degrees.clone(),
            c1_degree: r.c1_degree,
            semistable: r.semistable,
            segments: segments(r)?,
        })
    }

    pub fn headline(&self) -> String {
        let degrees: Vec<String> = self.degrees.iter().map(i64::to_string).collect();
        format!(
            "degrees: [{}]; restriction {}",
            degrees.join(", "),
            if self.semistable {
                "semistable"
            } else {
                "NOT semistable"
            }
        )
    }

    pub fn text(&self) -> String {
        let mut s = self.headline();
        s.push('\n');
        writeln!(
            s,
            "wall {}: rays {:?}, cones {} and {}, m_tau {}, c1·C = {}",
            self.wall,
            self.tau_rays,
            self.sigma,
            self.sigma_prime,
            tuple(&self.m_tau),
            self.c1_degree
        )
        .unwrap();
        for g in &self.segments {
            writeln!(
                s,
                "segment {}: {} -- {} (degree {})",
                g.label,
                tuple(&g.from),
                tuple(&g.to),
                g.degree
            )
            .unwrap();
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsReport {
    pub schema_version: u32,
    pub divisor: Vec<String>,
    pub weights: Vec<String>,
}

impl WeightsReport {
    pub fn text(&self) -> String {
        format!("{}\n", tuple(&self.weights))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepReport {
    pub max_j: i64,
    pub space: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructReport {
    pub schema_version: u32,
    pub filtrations: Vec<Vec<StepReport>>,
    pub round_trip: bool,
}

impl ReconstructReport {
    pub fn new(recovered: &[Filtration], original: &[Filtration]) -> Self {
        ReconstructReport {
            schema_version: SCHEMA_VERSION,
            filtrations: recovered
                .iter()
                .map(|f| {
                    f.steps()
                        .iter()
                        .map(|(a, v)| StepReport {
                            max_j: *a,
                            space: basis_rows(v),
                        })
                        .collect()
                })
                .collect(),
            round_trip: recovered == original,
        }
    }

    pub fn text(&self, rec: &[Filtration]) -> String {
        let mut s = String::new();
        for (i, f) in rec.iter().enumerate() {
            let steps: Vec<String> = f
                .steps()
                .iter()
                .map(|(a, v)| format!("({a}, {v})"))
                .collect();
            writeln!(s, "ray {i}: {}", steps.join(", ")).unwrap();
        }
        writeln!(
            s,
            "round trip: {}",
            if self.round_trip { "exact" } else { "MISMATCH" }
        )
        .unwrap();
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeCheck {
    pub cone: usize,
    pub rays: Vec<usize>,
    pub determinant: String,
    pub smooth: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WallCheck {
    pub tau_rays: Vec<usize>,
    pub cones: Vec<usize>,
    pub paired: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateReport {
    pub schema_version: u32,
    pub fan_pass: bool,
    pub cones: Vec<ConeCheck>,
    pub walls: Vec<WallCheck>,
    pub positively_spanning: bool,
    pub connected: bool,
    /// `None` when the document has no bundle.
    pub compatible: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub characters: Option<Vec<Vec<Vec<i64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Trace>,
}

impl ValidateReport {
    pub fn new(
        fan: &Fan,
        report: &FanReport,
        sheet: Option<&CharacterSheet>,
        trace: Option<Trace>,
    ) -> Result<Self> {
        let characters = sheet
            .map(|s| {
                s.cones
                    .iter()
                    .map(|c| {
                        c.characters()
                            .iter()
                            .map(|u| ints(u))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?;
        Ok(ValidateReport {
            schema_version: SCHEMA_VERSION,
            fan_pass: report.pass,
            cones: report
                .cones
                .iter()
                .map(|c| ConeCheck {
                    cone: c.cone,
                    rays: fan.max_cones()[c.cone].clone(),
                    determinant: c.determinant.clone(),
                    smooth: c.smooth,
                })
                .collect(),
            walls: report
                .walls
                .iter()
                .map(|w| WallCheck {
                    tau_rays: w.tau_rays.clone(),
                    cones: w.cones.clone(),
                    paired: w.paired,
                })
                .collect(),
            positively_spanning: report.positively_spanning,
            connected: report.connected,
            compatible: sheet.map(|_| true),
            characters,
            trace,
        })
    }

    pub fn text(&self) -> String {
        let mut s = format!(
            "fan: {} ({} cones, {} walls)\n",
            if self.fan_pass { "PASS" } else { "FAIL" },
            self.cones.len(),
            self.walls.len()
        );
        match self.compatible {
            Some(true) => s.push_str("bundle: compatible\n"),
            Some(false) => s.push_str("bundle: incompatible\n"),
            None => {}
        }
        if let Some(chars) = &self.characters {
            for (c, us) in chars.iter().enumerate() {
                let us: Vec<String> = us.iter().map(|u| tuple(u)).collect();
                writeln!(s, "u(cone {c}) = {}", braces(&us)).unwrap();
            }
        }
        if let Some(t) = &self.trace {
            t.text(&mut s);
        }
        s
    }
}

/// Any report, tagged by the command that produced it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum Report {
    Check(CheckReport),
    Parliament(ParliamentReport),
    Flats(FlatsReport),
    Restrict(RestrictReport),
    Weights(WeightsReport),
    Reconstruct(ReconstructReport),
    Validate(ValidateReport),
}

impl Report {
    pub fn json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}
