//! Waypoint extraction from free-form model output.
//!
//! The parser scans for bracketed arrays of numeric pairs (`[[x, y], ...]`,
//! inner pairs may also use parentheses) and returns the last one found.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{PathCandidate, Point};
use crate::number::{self, Scalar, MAX_FRACTION_DIGITS};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedResponse {
    pub waypoints: Vec<Point>,
    pub raw_text: String,
}

impl ParsedResponse {
    pub fn path(&self) -> PathCandidate {
        PathCandidate::new(self.waypoints.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("no waypoint array found in response")]
    NoPathFound,
    #[error("waypoint array found but its entries are not numeric pairs: {0}")]
    MalformedPair(String),
}

struct Scanner<'a> {
    s: &'a [u8],
    i: usize,
}

impl<'a> Scanner<'a> {
    fn skip_ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.s.get(self.i) == Some(&c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.i).copied()
    }

    fn number(&mut self) -> Option<Scalar> {
        self.skip_ws();
        let start = self.i;
        while self.i < self.s.len() && matches!(self.s[self.i], b'0'..=b'9' | b'.' | b'-' | b'+' | b'e' | b'E') {
            self.i += 1;
        }
        let text = std::str::from_utf8(&self.s[start..self.i]).ok()?;
        parse_number(text)
    }

    fn pair(&mut self) -> Option<Point> {
        let close = match self.peek()? {
            b'[' => b']',
            b'(' => b')',
            _ => return None,
        };
        self.i += 1;
        let x = self.number()?;
        if !self.eat(b',') {
            return None;
        }
        let y = self.number()?;
        self.eat(close).then(|| Point::new(x, y))
    }

    fn array(&mut self) -> Option<Vec<Point>> {
        if !self.eat(b'[') {
            return None;
        }
        let mut out = vec![self.pair()?];
        loop {
            if self.eat(b']') {
                return Some(out);
            }
            if !self.eat(b',') {
                return None;
            }
            out.push(self.pair()?);
        }
    }
}

/// Decimal literal; digits past the twelfth fractional place are rounded.
pub fn parse_number(text: &str) -> Option<Scalar> {
    match number::parse_decimal(text) {
        Ok(v) => Some(v),
        Err(number::DecimalError::TooPrecise(_)) => {
            let t = text.trim();
            if t.contains(['e', 'E']) {
                return None;
            }
            let (whole, frac) = t.split_once('.')?;
            let digits = format!("{}{frac}", whole.trim_start_matches(['-', '+']));
            let mut n: num::BigInt = digits.parse().ok()?;
            if whole.starts_with('-') {
                n = -n;
            }
            let q = Scalar::new(n, num::pow(num::BigInt::from(10), frac.len()));
            Some(number::round_to_digits(&q, MAX_FRACTION_DIGITS))
        }
        Err(_) => None,
    }
}

/// All maximal arrays of pairs, left to right, with their byte spans.
pub fn find_arrays(text: &str) -> Vec<(usize, usize, Vec<Point>)> {
    let bytes = text.as_bytes();
    let mut found = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'[' {
            let mut sc = Scanner { s: bytes, i };
            if let Some(points) = sc.array() {
                found.push((i, sc.i, points));
                i = sc.i;
                continue;
            }
        }
        i += 1;
    }
    found
}

/// All parenthesized or bracketed pairs `(x, y)` in order of appearance.
pub fn find_pairs(text: &str) -> Vec<Point> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if matches!(bytes[i], b'(' | b'[') {
            let mut sc = Scanner { s: bytes, i };
            if let Some(p) = sc.pair() {
                out.push(p);
                i = sc.i;
                continue;
            }
        }
        i += 1;
    }
    out
}

/// An opening bracket followed by another bracket or parenthesis looks like
/// an attempted waypoint array.
fn looks_like_array(text: &str) -> Option<String> {
    let bytes = text.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        if b != b'[' {
            continue;
        }
        let mut sc = Scanner { s: bytes, i: i + 1 };
        if matches!(sc.peek(), Some(b'[' | b'(')) {
            return Some(text[i..].chars().take(60).collect());
        }
    }
    None
}

pub fn parse_response(raw: &str) -> Result<ParsedResponse, ParseError> {
    match find_arrays(raw).pop() {
        Some((_, _, waypoints)) => Ok(ParsedResponse {
            waypoints,
            raw_text: raw.to_string(),
        }),
        None => match looks_like_array(raw) {
            Some(snippet) => Err(ParseError::MalformedPair(snippet)),
            None => Err(ParseError::NoPathFound),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::ratio;

    #[test]
    fn trailing_array() {
        let r = parse_response("thoughts... [[0,0],[5,5]]").unwrap();
        assert_eq!(r.waypoints, vec![Point::from_ints(0, 0), Point::from_ints(5, 5)]);
    }

    #[test]
    fn last_array_wins() {
        let r = parse_response("first [[1,1],[2,2]] then\n```\n[[3, 3], [4.5, -6]]\n```").unwrap();
        assert_eq!(r.waypoints[1], Point::new(ratio(9, 2), ratio(-6, 1)));
    }

    #[test]
    fn parenthesized_pairs() {
        let r = parse_response("[(1, 2), (3.25, 4)]").unwrap();
        assert_eq!(r.waypoints.len(), 2);
    }

    #[test]
    fn no_path() {
        assert_eq!(parse_response("I cannot solve this"), Err(ParseError::NoPathFound));
        assert_eq!(parse_response("see [1] and [2, 3]"), Err(ParseError::NoPathFound));
    }

    #[test]
    fn malformed() {
        assert!(matches!(parse_response("[[a, b], [c, d]]"), Err(ParseError::MalformedPair(_))));
        assert!(matches!(parse_response("[[1, 2, 3]]"), Err(ParseError::MalformedPair(_))));
    }

    #[test]
    fn nested_outer_bracket() {
        let r = parse_response("[[[1,2],[3,4]]]").unwrap();
        assert_eq!(r.waypoints.len(), 2);
    }

    #[test]
    fn excess_digits_are_rounded() {
        let r = parse_response("[[0.3333333333333333, 1]]").unwrap();
        assert_eq!(r.waypoints[0].x, ratio(333_333_333_333, 1_000_000_000_000));
    }

    #[test]
    fn pairs_in_prose() {
        let pts = find_pairs("Segment 0 from (1, 2.5) to (3, -4) intersects obstacle 1.");
        assert_eq!(pts, vec![Point::new(ratio(1, 1), ratio(5, 2)), Point::from_ints(3, -4)]);
    }
}
