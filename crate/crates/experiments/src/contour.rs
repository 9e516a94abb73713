//! Sampled scalar fields, marching-squares level sets and SVG rendering.

use std::fmt::Write as _;

use crate::config::BoundingBox;

/// Values on a regular `nx × ny` grid, row-major with `x` varying fastest.
/// `None` marks masked samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub bbox: BoundingBox,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<Option<f64>>,
}

impl SampledField {
    pub fn point(bbox: &BoundingBox, nx: usize, ny: usize, ix: usize, iy: usize) -> (f64, f64) {
        let x = bbox.xmin + (bbox.xmax - bbox.xmin) * ix as f64 / (nx - 1) as f64;
        let y = bbox.ymin + (bbox.ymax - bbox.ymin) * iy as f64 / (ny - 1) as f64;
        (x, y)
    }

    pub fn at(&self, ix: usize, iy: usize) -> Option<f64> {
        self.values[iy * self.nx + ix]
    }

    pub fn range(&self) -> Option<(f64, f64)> {
        self.values.iter().flatten().fold(None, |acc, &v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
    }
}

/// `count` levels uniformly spaced strictly inside `[min, max]`.
pub fn contour_levels(min: f64, max: f64, count: usize) -> Vec<f64> {
    let step = (max - min) / (count + 1) as f64;
    (1..=count).map(|k| min + step * k as f64).collect()
}

pub type Segment = [(f64, f64); 2];

/// Level set segments of `field` at `level`. Cells with a masked corner are
/// skipped; saddle cells are resolved with the cell-center average.
pub fn marching_squares(field: &SampledField, level: f64) -> Vec<Segment> {
    let mut out = Vec::new();
    for iy in 0..field.ny - 1 {
        for ix in 0..field.nx - 1 {
            let corners = [(ix, iy), (ix + 1, iy), (ix + 1, iy + 1), (ix, iy + 1)];
            let Some(v) = corners
                .iter()
                .map(|&(i, j)| field.at(i, j))
                .collect::<Option<Vec<f64>>>()
            else {
                continue;
            };
            let p: Vec<(f64, f64)> = corners
                .iter()
                .map(|&(i, j)| SampledField::point(&field.bbox, field.nx, field.ny, i, j))
                .collect();
            let case = v
                .iter()
                .enumerate()
                .fold(0usize, |c, (k, &val)| c | (usize::from(val > level) << k));
            let cross = |a: usize, b: usize| {
                let t = (level - v[a]) / (v[b] - v[a]);
                (p[a].0 + t * (p[b].0 - p[a].0), p[a].1 + t * (p[b].1 - p[a].1))
            };
            // Edges: 0 = bottom (0-1), 1 = right (1-2), 2 = top (2-3), 3 = left (3-0).
            let edge = |e: usize| cross(e, (e + 1) % 4);
            let pairs: &[(usize, usize)] = match case {
                0 | 15 => &[],
                1 | 14 => &[(3, 0)],
                2 | 13 => &[(0, 1)],
                3 | 12 => &[(3, 1)],
                4 | 11 => &[(1, 2)],
                6 | 9 => &[(0, 2)],
                7 | 8 => &[(3, 2)],
                5 | 10 => {
                    let isolate_odd_corners = (v.iter().sum::<f64>() / 4.0 > level) == (case == 5);
                    if isolate_odd_corners {
                        &[(3, 2), (0, 1)]
                    } else {
                        &[(3, 0), (1, 2)]
                    }
                }
                _ => unreachable!(),
            };
            out.extend(pairs.iter().map(|&(a, b)| [edge(a), edge(b)]));
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct CircleShape {
    pub center: (f64, f64),
    pub radius: f64,
}

/// A static SVG 1.1 document with the disks and one path per level.
pub fn render_svg(bbox: &BoundingBox, disks: &[CircleShape], contours: &[(f64, Vec<Segment>)]) -> String {
    let (w, h) = (bbox.xmax - bbox.xmin, bbox.ymax - bbox.ymin);
    let width_px = 800.0;
    let height_px = width_px * h / w;
    let stroke = w / 800.0;
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width_px}" height="{height_px:.0}" viewBox="{} {} {w} {h}">"#,
        bbox.xmin, -bbox.ymax
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{}" y="{}" width="{w}" height="{h}" fill="white"/>"#,
        bbox.xmin, -bbox.ymax
    );
    let _ = writeln!(svg, r#"<g transform="scale(1,-1)">"#);
    for d in disks {
        let _ = writeln!(
            svg,
            r##"<circle cx="{}" cy="{}" r="{}" fill="#d0d0d0" stroke="black" stroke-width="{stroke}"/>"##,
            d.center.0, d.center.1, d.radius
        );
    }
    for (level, segments) in contours {
        if segments.is_empty() {
            continue;
        }
        let mut path = String::new();
        for [a, b] in segments {
            let _ = write!(path, "M{} {}L{} {}", a.0, a.1, b.0, b.1);
        }
        let _ = writeln!(
            svg,
            r##"<path data-level="{level}" d="{path}" fill="none" stroke="#1f4e9c" stroke-width="{stroke}"/>"##
        );
    }
    let _ = writeln!(svg, "</g>\n</svg>");
    svg
}
