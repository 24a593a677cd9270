//! Line-oriented polygon description files.
//!
//! ```text
//! # comments start with '#'
//! name: L-table
//! vertices:
//! 0 0
//! 5 0
//! 5 1
//! labels: b, r, t, s, u, l
//! ```
//!
//! Instead of `vertices:` a table may be given by `angles:` (fractions of π,
//! `m/n`) together with `lengths:`. Values may follow the key on the same
//! line or on the lines below it.

use thiserror::Error;

use crate::geom::Point2;
use crate::polygon::{AngleFraction, Polygon, PolygonError};

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Vertices(Vec<Point2>),
    /// Raw `(num, den)` pairs; reduced and checked when building the table.
    Angles {
        angles: Vec<(u64, u64)>,
        lengths: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolygonDocument {
    pub name: String,
    pub geometry: Geometry,
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key {key:?} given twice")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: {message}")]
    BadValue { line: usize, message: String },
    #[error("line {line}: value outside any key")]
    Orphan { line: usize },
    #[error("need exactly one of 'vertices:' or 'angles:' with 'lengths:'")]
    Geometry,
}

fn tokens(s: &str) -> impl Iterator<Item = &str> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
}

fn number(tok: &str, line: usize) -> Result<f64, ParseError> {
    tok.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| ParseError::BadValue {
            line,
            message: format!("not a number: {tok:?}"),
        })
}

fn fraction(tok: &str, line: usize) -> Result<(u64, u64), ParseError> {
    let bad = || ParseError::BadValue {
        line,
        message: format!("not a fraction m/n: {tok:?}"),
    };
    let (m, n) = tok.split_once('/').unwrap_or((tok, "1"));
    let m = m.parse::<u64>().map_err(|_| bad())?;
    let n = n.parse::<u64>().map_err(|_| bad())?;
    if n == 0 {
        return Err(bad());
    }
    Ok((m, n))
}

const KEYS: [&str; 5] = ["name", "vertices", "angles", "lengths", "labels"];

/// Parses a document. Geometric validity is checked by
/// [`PolygonDocument::to_polygon`].
pub fn parse_document(text: &str) -> Result<PolygonDocument, ParseError> {
    // Collect (key, [(line, value text)]) blocks first.
    let mut blocks: Vec<(&str, usize, Vec<(usize, &str)>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let keyed = line.split_once(':').filter(|(k, _)| {
            let k = k.trim();
            !k.is_empty() && k.chars().all(|c| c.is_ascii_alphabetic() || c == '_')
        });
        match keyed {
            Some((key, rest)) => {
                let key = key.trim();
                if !KEYS.contains(&key) {
                    return Err(ParseError::UnknownKey {
                        line: line_no,
                        key: key.to_string(),
                    });
                }
                if blocks.iter().any(|(k, _, _)| *k == key) {
                    return Err(ParseError::DuplicateKey {
                        line: line_no,
                        key: key.to_string(),
                    });
                }
                let mut values = Vec::new();
                if !rest.trim().is_empty() {
                    values.push((line_no, rest.trim()));
                }
                blocks.push((key, line_no, values));
            }
            None => match blocks.last_mut() {
                Some((_, _, values)) => values.push((line_no, line)),
                None => return Err(ParseError::Orphan { line: line_no }),
            },
        }
    }

    let block = |key: &str| blocks.iter().find(|(k, _, _)| *k == key);
    let name = match block("name") {
        Some((_, _, v)) => v.iter().map(|(_, s)| *s).collect::<Vec<_>>().join(" "),
        None => String::new(),
    };

    let geometry = match (block("vertices"), block("angles"), block("lengths")) {
        (Some((_, _, values)), None, None) => {
            let mut pts = Vec::new();
            for &(line, text) in values {
                let toks: Vec<&str> = tokens(text).collect();
                if !toks.len().is_multiple_of(2) {
                    return Err(ParseError::BadValue {
                        line,
                        message: "vertices come as 'x y' pairs".to_string(),
                    });
                }
                for pair in toks.chunks(2) {
                    pts.push(Point2::new(number(pair[0], line)?, number(pair[1], line)?));
                }
            }
            Geometry::Vertices(pts)
        }
        (None, Some((_, _, av)), Some((_, _, lv))) => {
            let mut angles = Vec::new();
            for &(line, text) in av {
                for t in tokens(text) {
                    angles.push(fraction(t, line)?);
                }
            }
            let mut lengths = Vec::new();
            for &(line, text) in lv {
                for t in tokens(text) {
                    lengths.push(number(t, line)?);
                }
            }
            Geometry::Angles { angles, lengths }
        }
        _ => return Err(ParseError::Geometry),
    };

    let labels = block("labels").map(|(_, _, values)| {
        values
            .iter()
            .flat_map(|(_, t)| tokens(t))
            .map(str::to_string)
            .collect()
    });

    Ok(PolygonDocument {
        name,
        geometry,
        labels,
    })
}

impl PolygonDocument {
    /// Vertex-form document describing `p`, with labels when they are not
    /// the defaults.
    pub fn from_polygon(name: &str, p: &Polygon) -> Self {
        PolygonDocument {
            name: name.to_string(),
            geometry: Geometry::Vertices(p.vertices().to_vec()),
            labels: (!p.has_default_labels()).then(|| p.labels().to_vec()),
        }
    }

    pub fn to_polygon(&self) -> Result<Polygon, PolygonError> {
        let p = match &self.geometry {
            Geometry::Vertices(v) => Polygon::new(v.clone())?,
            Geometry::Angles { angles, lengths } => {
                let fractions = angles
                    .iter()
                    .enumerate()
                    .map(|(i, &(m, n))| {
                        if m == n {
                            Err(PolygonError::StraightAngle(i + 1))
                        } else {
                            AngleFraction::new(m, n)
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Polygon::from_exact_angles(&fractions, lengths)?
            }
        };
        match &self.labels {
            Some(l) => p.with_labels(l),
            None => Ok(p),
        }
    }

    /// Text form accepted by [`parse_document`]. Reals are written in
    /// shortest round-trip form.
    pub fn format(&self) -> String {
        let mut out = String::new();
        if !self.name.is_empty() {
            out.push_str(&format!("name: {}\n", self.name));
        }
        match &self.geometry {
            Geometry::Vertices(v) => {
                out.push_str("vertices:\n");
                for p in v {
                    out.push_str(&format!("{:?} {:?}\n", p.x, p.y));
                }
            }
            Geometry::Angles { angles, lengths } => {
                let a: Vec<String> = angles.iter().map(|(m, n)| format!("{m}/{n}")).collect();
                let l: Vec<String> = lengths.iter().map(|x| format!("{x:?}")).collect();
                out.push_str(&format!("angles: {}\n", a.join(" ")));
                out.push_str(&format!("lengths: {}\n", l.join(" ")));
            }
        }
        if let Some(labels) = &self.labels {
            out.push_str(&format!("labels: {}\n", labels.join(", ")));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const L_TABLE: &str = "# L-shaped table
name: L-table
vertices:
0 0
5 0
5 1
3 1
3 3
0 3
labels: b, r, t, s, u, l
";

    #[test]
    fn parses_vertices_and_labels() {
        let doc = parse_document(L_TABLE).unwrap();
        assert_eq!(doc.name, "L-table");
        let p = doc.to_polygon().unwrap();
        assert_eq!(p.k(), 6);
        assert_eq!(p.label(6), "l");
        assert_eq!(p.parse_side("t"), Some(3));
    }

    #[test]
    fn parses_angle_form() {
        let doc = parse_document("angles: 1/2 1/2 1/2 3/2 1/2 1/2\nlengths: 5 1 2 2 3 3\n").unwrap();
        let p = doc.to_polygon().unwrap();
        let expected = [(0., 0.), (5., 0.), (5., 1.), (3., 1.), (3., 3.), (0., 3.)];
        for (v, (x, y)) in p.vertices().iter().zip(expected) {
            assert!(v.dist(Point2::new(x, y)) < 1e-12, "{v:?}");
        }
    }

    #[test]
    fn values_on_following_lines() {
        let doc = parse_document("angles:\n1/3, 1/3\n1/3\nlengths:\n1\n1 1\n").unwrap();
        assert_eq!(doc.to_polygon().unwrap().k(), 3);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_document("colour: red\n"),
            Err(ParseError::UnknownKey { line: 1, .. })
        ));
        assert!(matches!(
            parse_document("vertices:\n0 0\n1 x\n"),
            Err(ParseError::BadValue { line: 3, .. })
        ));
        assert!(matches!(
            parse_document("vertices:\n0 0 1\n"),
            Err(ParseError::BadValue { line: 2, .. })
        ));
        assert_eq!(parse_document("name: x\n"), Err(ParseError::Geometry));
        assert_eq!(
            parse_document("vertices:\n0 0\nangles: 1/2\nlengths: 1\n"),
            Err(ParseError::Geometry)
        );
        assert!(matches!(parse_document("0 0\n"), Err(ParseError::Orphan { line: 1 })));
        assert!(matches!(
            parse_document("angles: 1/0\nlengths: 1\n"),
            Err(ParseError::BadValue { .. })
        ));
    }

    #[test]
    fn invalid_polygons_name_the_invariant() {
        let doc = parse_document("vertices:\n0 0\n1 0\n2 0\n1 1\n").unwrap();
        assert_eq!(doc.to_polygon(), Err(PolygonError::StraightAngle(2)));
        let doc = parse_document("angles: 1/1 1/2 1/2 1/2 1/2\nlengths: 1 1 1 1 1\n").unwrap();
        assert_eq!(doc.to_polygon(), Err(PolygonError::StraightAngle(1)));
    }

    #[test]
    fn format_round_trips() {
        let doc = parse_document(L_TABLE).unwrap();
        let again = parse_document(&doc.format()).unwrap();
        assert_eq!(doc, again);
        let p = doc.to_polygon().unwrap();
        let odd = p
            .map_points(|q| Point2::new(q.x * 0.1 + 1.0 / 3.0, q.y * 0.7))
            .unwrap();
        let emitted = PolygonDocument::from_polygon("scaled", &odd).format();
        assert_eq!(parse_document(&emitted).unwrap().to_polygon().unwrap(), odd);

        let angles = parse_document("angles: 1/3 1/3 1/3\nlengths: 2 2 2\n").unwrap();
        assert_eq!(parse_document(&angles.format()).unwrap(), angles);
    }
}
