//! The `key = value` experiment configuration format.
//!
//! Blank lines and everything after `#` are ignored. Lists are
//! comma-separated. Background terms use `const:<v>`, `re:<k>:<coef>` and
//! `im:<k>:<coef>`, so `H = re:1:2.0, re:2:1.0` is `2x₁ + (x₁² - x₂²)`.
//!
//! | key | default |
//! |---|---|
//! | `r1`, `r2` | `1` |
//! | `eps` or `eps_list` | `0.0156` |
//! | `m` or `m_list` | `256` |
//! | `conductivity` (`perfect`, `insulated`) | `perfect` |
//! | `method` (`standard`, `augmented`, `oracle`) | `augmented` |
//! | `H` | `re:1:1` |
//! | `layout` (`staggered`, `aligned`) | `staggered` |
//! | `quadrature` (`trapezoid`, `interpolatory`) | `trapezoid` |
//! | `series_tol` | `1e-13` |
//! | `series_max_terms` | `10000` |
//! | `bbox` (`xmin, xmax, ymin, ymax`) | both disks plus one larger radius |
//! | `resolution` (`n` or `nx, ny`) | `200` |
//! | `contours` | `30` |
//! | `projections` | `20` |
//! | `spectrum_eps` | `0.002` |

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use twodisk::{Conductivity, CrossQuadrature, HarmonicPolynomial, HarmonicTerm, NodeLayout, TwoDiskConfig};

use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Standard,
    Augmented,
    Oracle,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Standard => "standard",
            Method::Augmented => "augmented",
            Method::Oracle => "oracle",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl BoundingBox {
    fn encloses_disks(&self, config: &TwoDiskConfig) -> bool {
        [config.disk1(), config.disk2()].iter().all(|d| {
            let (c, r) = (d.center(), d.radius());
            c.x - r >= self.xmin && c.x + r <= self.xmax && c.y - r >= self.ymin && c.y + r <= self.ymax
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub r1: f64,
    pub r2: f64,
    pub eps: Vec<f64>,
    pub m: Vec<usize>,
    #[serde(with = "conductivity_name")]
    pub conductivity: Conductivity,
    pub method: Method,
    #[serde(with = "background_syntax")]
    pub background: HarmonicPolynomial,
    #[serde(with = "layout_name")]
    pub layout: NodeLayout,
    #[serde(with = "quadrature_name")]
    pub quadrature: CrossQuadrature,
    pub series_tol: f64,
    pub series_max_terms: usize,
    pub bbox: Option<BoundingBox>,
    pub resolution: (usize, usize),
    pub contours: usize,
    pub projections: usize,
    pub spectrum_eps: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            r1: 1.0,
            r2: 1.0,
            eps: vec![0.0156],
            m: vec![256],
            conductivity: Conductivity::Perfect,
            method: Method::Augmented,
            background: HarmonicPolynomial::x1(),
            layout: NodeLayout::Staggered,
            quadrature: CrossQuadrature::Trapezoid,
            series_tol: 1e-13,
            series_max_terms: twodisk::images::DEFAULT_M_MAX,
            bbox: None,
            resolution: (200, 200),
            contours: 30,
            projections: 20,
            spectrum_eps: 0.002,
        }
    }
}

impl ExperimentConfig {
    pub fn geometry(&self, eps: f64) -> twodisk::Result<TwoDiskConfig> {
        TwoDiskConfig::canonical(self.r1, self.r2, eps)
    }

    /// The configured box, or one that pads the disks by the larger radius.
    pub fn bounding_box(&self, eps: f64) -> BoundingBox {
        self.bbox.unwrap_or_else(|| {
            let pad = self.r1.max(self.r2);
            let half = 2.0 * pad;
            BoundingBox {
                xmin: -2.0 * self.r1 - eps / 2.0 - pad,
                xmax: 2.0 * self.r2 + eps / 2.0 + pad,
                ymin: -half,
                ymax: half,
            }
        })
    }
}

impl FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self, Error> {
        parse_config(text)
    }
}

fn config_error(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::default();
    let mut seen: HashMap<&str, usize> = HashMap::new();

    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| config_error(line, format!("expected `key = value`, found `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if let Some(first) = seen.insert(key, line) {
            return Err(config_error(line, format!("`{key}` already set on line {first}")));
        }
        let conflict = match key {
            "eps" => Some("eps_list"),
            "eps_list" => Some("eps"),
            "m" => Some("m_list"),
            "m_list" => Some("m"),
            _ => None,
        };
        if let Some(other) = conflict {
            if let Some(at) = seen.get(other) {
                return Err(config_error(
                    line,
                    format!("`{key}` conflicts with `{other}` on line {at}"),
                ));
            }
        }

        match key {
            "r1" => cfg.r1 = positive(line, key, value)?,
            "r2" => cfg.r2 = positive(line, key, value)?,
            "eps" => cfg.eps = vec![positive(line, key, value)?],
            "eps_list" => cfg.eps = list(value, |v| positive(line, key, v))?,
            "m" => cfg.m = vec![node_count(line, value)?],
            "m_list" => cfg.m = list(value, |v| node_count(line, v))?,
            "conductivity" => {
                cfg.conductivity = match value {
                    "perfect" => Conductivity::Perfect,
                    "insulated" => Conductivity::Insulated,
                    _ => return Err(config_error(line, format!("unknown conductivity `{value}`"))),
                }
            }
            "method" => {
                cfg.method = match value {
                    "standard" => Method::Standard,
                    "augmented" => Method::Augmented,
                    "oracle" => Method::Oracle,
                    _ => return Err(config_error(line, format!("unknown method `{value}`"))),
                }
            }
            "H" => cfg.background = parse_background(value).map_err(|m| config_error(line, m))?,
            "layout" => {
                cfg.layout = match value {
                    "staggered" => NodeLayout::Staggered,
                    "aligned" => NodeLayout::Aligned,
                    _ => return Err(config_error(line, format!("unknown layout `{value}`"))),
                }
            }
            "quadrature" => {
                cfg.quadrature = match value {
                    "trapezoid" => CrossQuadrature::Trapezoid,
                    "interpolatory" => CrossQuadrature::Interpolatory,
                    _ => return Err(config_error(line, format!("unknown quadrature `{value}`"))),
                }
            }
            "series_tol" => cfg.series_tol = positive(line, key, value)?,
            "series_max_terms" => cfg.series_max_terms = count(line, key, value)?,
            "bbox" => {
                let v = list(value, |v| number(line, key, v))?;
                let [xmin, xmax, ymin, ymax] = v[..] else {
                    return Err(config_error(line, "bbox needs four numbers: xmin, xmax, ymin, ymax"));
                };
                if !(xmin < xmax && ymin < ymax) {
                    return Err(config_error(line, "bbox must satisfy xmin < xmax and ymin < ymax"));
                }
                cfg.bbox = Some(BoundingBox { xmin, xmax, ymin, ymax });
            }
            "resolution" => {
                let v = list(value, |v| count(line, key, v))?;
                cfg.resolution = match v[..] {
                    [n] => (n, n),
                    [nx, ny] => (nx, ny),
                    _ => return Err(config_error(line, "resolution takes `n` or `nx, ny`")),
                };
                if cfg.resolution.0 < 2 || cfg.resolution.1 < 2 {
                    return Err(config_error(line, "resolution must be at least 2 in each direction"));
                }
            }
            "contours" => cfg.contours = count(line, key, value)?,
            "projections" => cfg.projections = count(line, key, value)?,
            "spectrum_eps" => cfg.spectrum_eps = positive(line, key, value)?,
            _ => return Err(config_error(line, format!("unknown key `{key}`"))),
        }
    }

    let geometry_line = ["r1", "r2", "eps", "eps_list"]
        .iter()
        .filter_map(|k| seen.get(k).copied())
        .max()
        .unwrap_or(0);
    for &eps in cfg.eps.iter().chain(std::iter::once(&cfg.spectrum_eps)) {
        cfg.geometry(eps)
            .map_err(|e| config_error(geometry_line, format!("invalid geometry at eps = {eps}: {e}")))?;
    }
    if let Some(bbox) = cfg.bbox {
        for &eps in &cfg.eps {
            if !bbox.encloses_disks(&cfg.geometry(eps)?) {
                return Err(config_error(
                    seen["bbox"],
                    format!("bbox does not enclose both disks at eps = {eps}"),
                ));
            }
        }
    }
    Ok(cfg)
}

fn list<T>(value: &str, item: impl Fn(&str) -> Result<T, Error>) -> Result<Vec<T>, Error> {
    value.split(',').map(|v| item(v.trim())).collect()
}

fn number(line: usize, key: &str, value: &str) -> Result<f64, Error> {
    match value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(config_error(
            line,
            format!("`{key}` expects a finite number, found `{value}`"),
        )),
    }
}

fn positive(line: usize, key: &str, value: &str) -> Result<f64, Error> {
    let v = number(line, key, value)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(config_error(line, format!("`{key}` must be positive, found {v}")))
    }
}

fn count(line: usize, key: &str, value: &str) -> Result<usize, Error> {
    match value.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(config_error(
            line,
            format!("`{key}` expects a positive integer, found `{value}`"),
        )),
    }
}

fn node_count(line: usize, value: &str) -> Result<usize, Error> {
    let m = count(line, "m", value)?;
    if m < 8 || !m.is_multiple_of(2) {
        return Err(config_error(
            line,
            format!("node count must be even and at least 8, found {m}"),
        ));
    }
    Ok(m)
}

/// Parses the background term list; an empty string is `H ≡ 0`.
pub fn parse_background(value: &str) -> Result<HarmonicPolynomial, String> {
    let mut constant = None;
    let mut terms: Vec<HarmonicTerm> = Vec::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').map(str::trim).collect();
        let coef = |s: &str| -> Result<f64, String> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("bad coefficient `{s}` in `{item}`"))
        };
        match parts[..] {
            ["const", v] => {
                if constant.replace(coef(v)?).is_some() {
                    return Err("constant given twice".into());
                }
            }
            [kind @ ("re" | "im"), k, v] => {
                let degree: u32 = k
                    .parse()
                    .ok()
                    .filter(|d| *d >= 1)
                    .ok_or_else(|| format!("degree must be a positive integer in `{item}`"))?;
                let c = coef(v)?;
                let term = match terms.iter_mut().position(|t| t.degree == degree) {
                    Some(i) => &mut terms[i],
                    None => {
                        terms.push(HarmonicTerm {
                            degree,
                            re: 0.0,
                            im: 0.0,
                        });
                        terms.last_mut().expect("just pushed")
                    }
                };
                let slot = if kind == "re" { &mut term.re } else { &mut term.im };
                if *slot != 0.0 {
                    return Err(format!("`{kind}:{degree}` given twice"));
                }
                *slot = c;
            }
            _ => return Err(format!("malformed term `{item}`")),
        }
    }
    HarmonicPolynomial::new(constant.unwrap_or(0.0), terms).map_err(|e| e.to_string())
}

mod background_syntax {
    use serde::{Deserialize, Deserializer, Serializer};
    use twodisk::HarmonicPolynomial;

    pub fn serialize<S: Serializer>(h: &HarmonicPolynomial, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(h)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<HarmonicPolynomial, D::Error> {
        let text = String::deserialize(d)?;
        super::parse_background(&text).map_err(serde::de::Error::custom)
    }
}

macro_rules! named_enum {
    ($module:ident, $ty:ty, $($variant:path => $name:literal),+) => {
        mod $module {
            use serde::{Deserialize, Deserializer, Serializer};

            pub fn serialize<S: Serializer>(v: &$ty, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(match v { $($variant => $name),+ })
            }

            pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<$ty, D::Error> {
                match String::deserialize(d)?.as_str() {
                    $($name => Ok($variant),)+
                    other => Err(serde::de::Error::custom(format!("unknown value `{other}`"))),
                }
            }
        }
    };
}

named_enum!(conductivity_name, twodisk::Conductivity,
    twodisk::Conductivity::Perfect => "perfect", twodisk::Conductivity::Insulated => "insulated");
named_enum!(layout_name, twodisk::NodeLayout,
    twodisk::NodeLayout::Staggered => "staggered", twodisk::NodeLayout::Aligned => "aligned");
named_enum!(quadrature_name, twodisk::CrossQuadrature,
    twodisk::CrossQuadrature::Trapezoid => "trapezoid", twodisk::CrossQuadrature::Interpolatory => "interpolatory");

#[cfg(test)]
mod tests {
    use super::*;
    use twodisk::Vec2;

    #[test]
    fn background_example() {
        let cfg = parse_config("H = re:1:2.0, re:2:1.0").unwrap();
        let x = Vec2::new(0.7, -0.4);
        assert!((cfg.background.eval(x) - (2.0 * x.x + x.x * x.x - x.y * x.y)).abs() < 1e-15);
    }

    #[test]
    fn empty_background_is_zero() {
        let cfg = parse_config("H =\n").unwrap();
        assert_eq!(cfg.background, HarmonicPolynomial::zero());
    }

    #[test]
    fn eps_conflict_is_reported_with_line() {
        let err = parse_config("eps = 1e-3\n# comment\neps_list = 0.1, 0.01").unwrap_err();
        assert!(matches!(err, Error::Config { line: 3, .. }), "{err}");
    }

    #[test]
    fn rejects_bad_input() {
        for (text, line) in [
            ("bogus = 1", 1),
            ("r1 = 1\nm = 7", 2),
            ("m_list = 16, 30, 33", 1),
            ("eps = -1", 1),
            ("no equals sign", 1),
            ("H = re:0:1", 1),
            ("H = re:1:1, re:1:2", 1),
            ("r1 = 1\nr1 = 2", 2),
            ("bbox = -1, 1, -1, 1", 1),
            ("method = magic", 1),
        ] {
            match parse_config(text) {
                Err(Error::Config { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn full_config_parses() {
        let text = "r1 = 2\nr2 = 1.5  # second radius\neps_list = 0.1, 0.01\nm_list = 64, 128\n\
                    conductivity = insulated\nmethod = standard\nH = const:1, im:1:-0.5\n\
                    layout = aligned\nquadrature = interpolatory\nresolution = 40, 30\ncontours = 12\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.eps, vec![0.1, 0.01]);
        assert_eq!(cfg.m, vec![64, 128]);
        assert_eq!(cfg.conductivity, Conductivity::Insulated);
        assert_eq!(cfg.layout, NodeLayout::Aligned);
        assert_eq!(cfg.resolution, (40, 30));
        assert_eq!(cfg.background.to_string(), "const:1, im:1:-0.5");
        assert!(cfg.bounding_box(0.01).encloses_disks(&cfg.geometry(0.01).unwrap()));
    }
}
