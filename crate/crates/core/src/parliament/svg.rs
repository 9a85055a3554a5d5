use std::cmp::Ordering;
use std::fmt::Write;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::Parliament;
use crate::error::{Error, Result};
use crate::exactla::{point_to_q, rat, QVector, Rational};

const PALETTE: [&str; 8] = [
    "#f2c14e", "#5b8def", "#6cc070", "#e4572e", "#a78bfa", "#17becf", "#f78fb3", "#8c564b",
];
const MARGIN: i64 = 40;

#[derive(Clone, Debug, Default)]
pub struct SvgOptions {
    /// Extra segments to draw on top, e.g. restriction segments of a wall.
    pub segments: Vec<(QVector, QVector)>,
}

struct Frame {
    unit: BigInt,
    xmin: BigInt,
    ymax: BigInt,
}

impl Frame {
    fn px(&self, p: &[Rational]) -> (BigInt, BigInt) {
        let u = Rational::from_integer(self.unit.clone());
        let x = (&p[0] - Rational::from_integer(self.xmin.clone())) * &u;
        let y = (Rational::from_integer(self.ymax.clone()) - &p[1]) * &u;
        (x.to_integer() + MARGIN, y.to_integer() + MARGIN)
    }
}

/// Orders the vertices of a convex polygon counterclockwise, exactly.
fn convex_order(vertices: &[QVector]) -> Vec<QVector> {
    if vertices.len() < 3 {
        return vertices.to_vec();
    }
    let n = rat(vertices.len() as i64);
    let cx = vertices.iter().fold(rat(0), |a, v| a + &v[0]) / &n;
    let cy = vertices.iter().fold(rat(0), |a, v| a + &v[1]) / &n;
    let half = |v: &QVector| -> u8 {
        let (dx, dy) = (&v[0] - &cx, &v[1] - &cy);
        if dy.is_positive() || (dy.is_zero() && dx.is_positive()) {
            0
        } else {
            1
        }
    };
    let mut out = vertices.to_vec();
    out.sort_by(|a, b| {
        half(a).cmp(&half(b)).then_with(|| {
            let cross = (&a[0] - &cx) * (&b[1] - &cy) - (&a[1] - &cy) * (&b[0] - &cx);
            if cross.is_positive() {
                Ordering::Less
            } else if cross.is_negative() {
                Ordering::Greater
            } else {
                Ordering::Equal
            }
        })
    });
    out
}

fn marker(kind: usize, x: &BigInt, y: &BigInt, class: &str) -> String {
    let s = 6;
    match kind % 4 {
        0 => format!(r#"<circle class="{class}" cx="{x}" cy="{y}" r="{s}"/>"#),
        1 => format!(
            r#"<rect class="{class}" x="{}" y="{}" width="{}" height="{}"/>"#,
            x - s,
            y - s,
            2 * s,
            2 * s
        ),
        2 => format!(
            r#"<polygon class="{class}" points="{},{} {},{} {},{} {},{}"/>"#,
            x,
            y - s - 2,
            x + s + 2,
            y,
            x,
            y + s + 2,
            x - s - 2,
            y
        ),
        _ => format!(
            r#"<polygon class="{class}" points="{},{} {},{} {},{}"/>"#,
            x,
            y - s - 2,
            x + s + 2,
            y + s,
            x - s - 2,
            y + s
        ),
    }
}

/// A deterministic SVG drawing of a two-dimensional parliament.
pub fn render_svg(p: &Parliament, opts: &SvgOptions) -> Result<String> {
    let dim = p
        .entries
        .first()
        .map(|e| e.polytope.dim())
        .ok_or_else(|| Error::Unsupported("empty parliament".into()))?;
    if dim != 2 {
        return Err(Error::Unsupported(format!(
            "cannot draw a {dim}-dimensional parliament"
        )));
    }
    let mut points: Vec<QVector> = Vec::new();
    let mut denom = BigInt::one();
    for e in &p.entries {
        points.extend(e.polytope.vertices().iter().cloned());
        denom = denom.lcm(&e.polytope.denominator());
    }
    for a in p.annotations.iter().flatten() {
        points.push(point_to_q(&a.character));
    }
    for (a, b) in &opts.segments {
        points.push(a.clone());
        points.push(b.clone());
        for x in a.iter().chain(b) {
            denom = denom.lcm(x.denom());
        }
    }
    if points.is_empty() {
        points.push(vec![rat(0), rat(0)]);
    }
    let floor = |k: usize| -> BigInt {
        points
            .iter()
            .map(|v| v[k].floor().to_integer())
            .min()
            .unwrap()
            - 1
    };
    let ceil = |k: usize| -> BigInt {
        points
            .iter()
            .map(|v| v[k].ceil().to_integer())
            .max()
            .unwrap()
            + 1
    };
    let (xmin, xmax, ymin, ymax) = (floor(0), ceil(0), floor(1), ceil(1));
    let frame = Frame {
        unit: denom.lcm(&BigInt::from(60)),
        xmin: xmin.clone(),
        ymax: ymax.clone(),
    };
    let width = (&xmax - &xmin) * &frame.unit + 2 * MARGIN;
    let legend_rows = p.entries.len() as i64;
    let height = (&ymax - &ymin) * &frame.unit + 2 * MARGIN + 18 * legend_rows;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    )
    .unwrap();
    writeln!(
        s,
        r#"<style>.grid{{stroke:#ddd;stroke-width:1}}.axis{{stroke:#999;stroke-width:1.5}}.entry{{fill-opacity:0.45;stroke:#333;stroke-width:1.5}}.wall-segment{{stroke:#d62728;stroke-width:3}}text{{font-family:sans-serif;font-size:13px}}</style>"#
    )
    .unwrap();

    s.push_str("<g class=\"lattice\">\n");
    let mut x = xmin.clone();
    while x <= xmax {
        let (a, top) = frame.px(&[
            Rational::from_integer(x.clone()),
            Rational::from_integer(ymax.clone()),
        ]);
        let (_, bottom) = frame.px(&[
            Rational::from_integer(x.clone()),
            Rational::from_integer(ymin.clone()),
        ]);
        let class = if x.is_zero() { "axis" } else { "grid" };
        writeln!(
            s,
            r#"<line class="{class}" x1="{a}" y1="{top}" x2="{a}" y2="{bottom}"/>"#
        )
        .unwrap();
        x += 1;
    }
    let mut y = ymin.clone();
    while y <= ymax {
        let (left, b) = frame.px(&[
            Rational::from_integer(xmin.clone()),
            Rational::from_integer(y.clone()),
        ]);
        let (right, _) = frame.px(&[
            Rational::from_integer(xmax.clone()),
            Rational::from_integer(y.clone()),
        ]);
        let class = if y.is_zero() { "axis" } else { "grid" };
        writeln!(
            s,
            r#"<line class="{class}" x1="{left}" y1="{b}" x2="{right}" y2="{b}"/>"#
        )
        .unwrap();
        y += 1;
    }
    s.push_str("</g>\n");

    s.push_str("<g class=\"entries\">\n");
    for (i, e) in p.entries.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let verts = convex_order(e.polytope.vertices());
        if verts.is_empty() {
            continue;
        }
        let coords: Vec<String> = verts
            .iter()
            .map(|v| {
                let (a, b) = frame.px(v);
                format!("{a},{b}")
            })
            .collect();
        match verts.len() {
            1 => {
                let (a, b) = frame.px(&verts[0]);
                writeln!(s, r#"<circle class="entry" fill="{color}" cx="{a}" cy="{b}" r="4"><title>P_{}</title></circle>"#, e.label).unwrap();
            }
            2 => {
                writeln!(s, r#"<polyline class="entry" stroke="{color}" points="{}"><title>P_{}</title></polyline>"#, coords.join(" "), e.label).unwrap();
            }
            _ => {
                writeln!(s, r#"<polygon class="entry" fill="{color}" points="{}"><title>P_{}</title></polygon>"#, coords.join(" "), e.label).unwrap();
            }
        }
    }
    s.push_str("</g>\n");

    if !opts.segments.is_empty() {
        s.push_str("<g class=\"wall\">\n");
        for (a, b) in &opts.segments {
            let (x1, y1) = frame.px(a);
            let (x2, y2) = frame.px(b);
            writeln!(
                s,
                r#"<line class="wall-segment" x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}"/>"#
            )
            .unwrap();
        }
        s.push_str("</g>\n");
    }

    s.push_str("<g class=\"characters\">\n");
    for (c, notes) in p.annotations.iter().enumerate() {
        for a in notes {
            let (x, y) = frame.px(&point_to_q(&a.character));
            s.push_str(&marker(c, &x, &y, &format!("cone-{c}")));
            s.push('\n');
        }
    }
    s.push_str("</g>\n");

    s.push_str("<g class=\"legend\">\n");
    let base = (&ymax - &ymin) * &frame.unit + 2 * MARGIN;
    for (i, e) in p.entries.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = &base + 18 * i as i64;
        let note = if e.polytope.is_empty() {
            " (empty)"
        } else {
            ""
        };
        writeln!(
            s,
            r#"<rect x="{MARGIN}" y="{}" width="12" height="12" fill="{color}"/><text x="{}" y="{}">P_{}{note}</text>"#,
            &y - 11,
            MARGIN + 18,
            y,
            e.label
        )
        .unwrap();
    }
    s.push_str("</g>\n</svg>\n");
    Ok(s)
}
