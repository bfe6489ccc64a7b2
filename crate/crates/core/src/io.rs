//! Line-based table, glued-polygon and word-list files.

use num_rational::Ratio;
use thiserror::Error;

use crate::flow::{format_word, parse_word};
use crate::numeric::{NumberError, Point2, Scalar};
use crate::surface::{validate_glued_polygon, GluedPolygon, PairingMap, RawGluedPolygon, RawPairing, SurfaceError};
use crate::table::{validate_table, Label, LabeledTable, TableError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IoError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Number { line: usize, source: NumberError },
    #[error("missing `{0}` line")]
    Missing(&'static str),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

fn syntax(line: usize, message: impl Into<String>) -> IoError {
    IoError::Syntax { line, message: message.into() }
}

fn number<S: Scalar>(line: usize, s: &str) -> Result<S, IoError> {
    S::parse_literal(s).map_err(|source| IoError::Number { line, source })
}

/// Non-blank lines with comments stripped, numbered from 1.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("");
        let toks: Vec<&str> = l.split_whitespace().collect();
        (!toks.is_empty()).then_some((i + 1, toks))
    })
}

/// Parses `<p>/<q>pi`, `pi`, `-pi`, `<k>pi`.
pub fn parse_pi_multiple(s: &str) -> Option<Ratio<i64>> {
    let body = s.strip_suffix("pi")?;
    match body {
        "" => Some(Ratio::from_integer(1)),
        "-" => Some(Ratio::from_integer(-1)),
        _ => {
            let (n, d) = match body.split_once('/') {
                Some((n, d)) => (n.parse().ok()?, d.parse().ok()?),
                None => (body.parse().ok()?, 1),
            };
            (d != 0).then(|| Ratio::new(n, d))
        }
    }
}

pub fn parse_raw_glued<S: Scalar>(text: &str) -> Result<RawGluedPolygon<S>, IoError> {
    let mut name = None;
    let mut vertices = Vec::new();
    let mut labels: Option<Vec<Label>> = None;
    let mut pairings = Vec::new();
    for (ln, toks) in content_lines(text) {
        match toks[0] {
            "table" => {
                if toks.len() != 2 {
                    return Err(syntax(ln, "expected `table <name>`"));
                }
                name = Some(toks[1].to_string());
            }
            "vertex" => {
                if toks.len() != 3 {
                    return Err(syntax(ln, "expected `vertex <x> <y>`"));
                }
                vertices.push(Point2::new(number(ln, toks[1])?, number(ln, toks[2])?));
            }
            "labels" => labels = Some(toks[1..].iter().map(|t| Label::from(*t)).collect()),
            "pair" => pairings.push(parse_pair(ln, &toks)?),
            other => return Err(syntax(ln, format!("unknown directive `{other}`"))),
        }
    }
    Ok(RawGluedPolygon {
        name: name.ok_or(IoError::Missing("table"))?,
        vertices,
        labels: labels.ok_or(IoError::Missing("labels"))?,
        pairings,
    })
}

fn parse_pair<S: Scalar>(ln: usize, toks: &[&str]) -> Result<RawPairing<S>, IoError> {
    let map = match toks.get(3).copied() {
        Some("translate") if toks.len() == 6 => PairingMap::Translate(Point2::new(number(ln, toks[4])?, number(ln, toks[5])?)),
        Some("rotate") if toks.len() == 8 && toks[5] == "about" => {
            let r = parse_pi_multiple(toks[4]).ok_or_else(|| syntax(ln, format!("bad angle `{}`", toks[4])))?;
            PairingMap::Rotate {
                num: *r.numer(),
                den: *r.denom(),
                center: Point2::new(number(ln, toks[6])?, number(ln, toks[7])?),
            }
        }
        _ => {
            return Err(syntax(
                ln,
                "expected `pair <a> <b> translate <tx> <ty>` or `pair <a> <b> rotate <p>/<q>pi about <x> <y>`",
            ))
        }
    };
    Ok(RawPairing { from: toks[1].into(), to: toks[2].into(), map })
}

pub fn parse_table<S: Scalar>(text: &str) -> Result<LabeledTable<S>, IoError> {
    let raw: RawGluedPolygon<S> = parse_raw_glued(text)?;
    if !raw.pairings.is_empty() {
        return Err(IoError::Syntax { line: 0, message: "`pair` lines are not allowed in a table file".into() });
    }
    Ok(validate_table(raw.name, raw.vertices, raw.labels)?)
}

pub fn parse_glued<S: Scalar>(text: &str) -> Result<GluedPolygon<S>, IoError> {
    Ok(validate_glued_polygon(parse_raw_glued(text)?)?)
}

pub fn write_table<S: Scalar>(t: &LabeledTable<S>) -> String {
    let mut out = format!("table {}\n", t.name());
    for v in t.vertices() {
        out.push_str(&format!("vertex {} {}\n", v.x.format(), v.y.format()));
    }
    let ls: Vec<&str> = t.labels().iter().map(|l| &**l).collect();
    out.push_str(&format!("labels {}\n", ls.join(" ")));
    out
}

/// One comma-separated word per line; blank lines and `#` comments skipped.
pub fn parse_word_list(text: &str) -> Vec<Vec<Label>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(parse_word)
        .collect()
}

pub fn write_word_list(words: &[Vec<Label>]) -> String {
    words.iter().map(|w| format_word(w) + "\n").collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{Exact, F64};
    use crate::table::labels;

    const SQUARE: &str = "# unit square\ntable square\nvertex 0 0\nvertex 1 0\nvertex 1 1\nvertex 0 1\nlabels 1 2 3 4\n";

    #[test]
    fn table_round_trip() {
        let t: LabeledTable<Exact> = parse_table(SQUARE).unwrap();
        assert_eq!(t.len(), 4);
        assert_eq!(t.name(), "square");
        let again: LabeledTable<Exact> = parse_table(&write_table(&t)).unwrap();
        assert_eq!(again, t);
    }

    #[test]
    fn decimals_parse_exactly() {
        let text = "table q\nvertex 0 0\nvertex 1 0\nvertex 1.1 1\nvertex 0 0.9\nlabels a b c d\n";
        let t: LabeledTable<Exact> = parse_table(text).unwrap();
        assert_eq!(t.vertex(2).x, Exact::from_ratio(11, 10));
        let f: LabeledTable<F64> = parse_table(text).unwrap();
        assert_eq!(f.vertex(3).y, F64(0.9));
    }

    #[test]
    fn errors() {
        assert_eq!(parse_table::<Exact>("vertex 0 0\nlabels a").unwrap_err(), IoError::Missing("table"));
        assert!(matches!(parse_table::<Exact>("table t\nvertex 0 x\n"), Err(IoError::Number { line: 2, .. })));
        assert!(matches!(parse_table::<Exact>("table t\nfoo\n"), Err(IoError::Syntax { line: 2, .. })));
        assert!(matches!(
            parse_table::<Exact>("table t\nvertex 0 0\nvertex 1 0\nvertex 0 1\nlabels a b\n"),
            Err(IoError::Table(TableError::LabelCountMismatch { .. }))
        ));
    }

    #[test]
    fn glued_file() {
        let text = format!("{SQUARE}pair 4 2 translate 1 0\npair 1 3 translate 0 1\n");
        let g: GluedPolygon<Exact> = parse_glued(&text).unwrap();
        assert!(g.is_translation_surface());
        let rot = format!("{SQUARE}pair 1 2 rotate -1/2pi about 1 0\npair 3 4 rotate -1/2pi about 0 1\n");
        let g: GluedPolygon<Exact> = parse_glued(&rot).unwrap();
        assert_eq!(g.genus(), 0);
        assert!(matches!(parse_glued::<Exact>(&format!("{SQUARE}pair 1 3 shear 0 1\n")), Err(IoError::Syntax { .. })));
    }

    #[test]
    fn pi_multiples() {
        assert_eq!(parse_pi_multiple("pi"), Some(Ratio::from_integer(1)));
        assert_eq!(parse_pi_multiple("-1/2pi"), Some(Ratio::new(-1, 2)));
        assert_eq!(parse_pi_multiple("3pi"), Some(Ratio::from_integer(3)));
        assert_eq!(parse_pi_multiple("1/0pi"), None);
        assert_eq!(parse_pi_multiple("1/2"), None);
    }

    #[test]
    fn word_lists() {
        let words = parse_word_list("1,2,3\n\n# c\n()\n4\n");
        assert_eq!(words, vec![labels(["1", "2", "3"]), vec![], labels(["4"])]);
        assert_eq!(parse_word_list(&write_word_list(&words)), words);
    }
}
