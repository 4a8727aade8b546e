//! Plane files.
//!
//! ```text
//! ppp v1 order=2
//! # plane 0 size 7
//! 0 1 2
//! 0 3 4
//! ...
//!
//! # plane 1 size 4
//! ...
//! ```
//!
//! One header line, then blocks separated by a blank line. Each block is one
//! plane with one line per row, points ascending, rows ascending. Rows
//! starting with `#` are comments; a block holding only comments is the
//! empty plane.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::plane::{Defect, Line, Order, PartialPlane};

const MAGIC: &str = "ppp v1 order=";

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parses a plane file and checks every plane for purity.
pub fn parse_planes(text: &str) -> Result<(Order, Vec<PartialPlane>)> {
    let mut rows = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    let (hline, header) = rows.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let n: usize = header
        .strip_prefix(MAGIC)
        .ok_or_else(|| parse_err(hline, format!("expected header `{MAGIC}<n>`")))?
        .trim()
        .parse()
        .map_err(|_| parse_err(hline, "bad order in header"))?;
    let order = Order::new(n).map_err(|e| parse_err(hline, e.to_string()))?;

    let mut planes = Vec::new();
    let mut block: Option<Vec<Line>> = None;
    let mut prev: Option<Line> = None;
    let close = |block: &mut Option<Vec<Line>>, planes: &mut Vec<PartialPlane>| {
        if let Some(lines) = block.take() {
            planes.push(PartialPlane::unchecked(order, lines));
        }
    };

    for (no, raw) in rows {
        let row = raw.trim();
        if row.is_empty() {
            close(&mut block, &mut planes);
            prev = None;
            continue;
        }
        let lines = block.get_or_insert_with(Vec::new);
        if row.starts_with('#') {
            continue;
        }
        let points = row
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| parse_err(no, format!("bad integer `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if points.len() != order.points_per_line() {
            return Err(parse_err(
                no,
                format!(
                    "expected {} points, found {}",
                    order.points_per_line(),
                    points.len()
                ),
            ));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(parse_err(no, "points must be strictly ascending"));
        }
        if let Some(&p) = points.iter().find(|&&p| p >= order.universe_size()) {
            return Err(parse_err(
                no,
                format!("point {p} outside 0..{}", order.universe_size()),
            ));
        }
        let line = Line::new(points).map_err(|e| parse_err(no, e.to_string()))?;
        if prev.is_some_and(|p| p >= line) {
            return Err(parse_err(no, "rows must be in ascending order"));
        }
        prev = Some(line);
        lines.push(line);
    }
    close(&mut block, &mut planes);

    for (i, p) in planes.iter().enumerate() {
        if let Some(Defect::Incompatible {
            first,
            second,
            shared,
        }) = p.defect()
        {
            return Err(Error::Structural {
                plane: i,
                first,
                second,
                shared,
            });
        }
    }
    Ok((order, planes))
}

/// Renders planes in file form. All planes must share `order`.
pub fn format_planes(order: Order, planes: &[PartialPlane]) -> Result<String> {
    let mut out = format!("{MAGIC}{order}\n");
    for (i, p) in planes.iter().enumerate() {
        if p.order() != order {
            return Err(Error::invalid(format!("plane {i} has order {}", p.order())));
        }
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "# plane {i} size {}", p.size());
        for l in p.lines() {
            let _ = writeln!(out, "{l}");
        }
    }
    Ok(out)
}

pub fn read_planes(path: impl AsRef<Path>) -> Result<(Order, Vec<PartialPlane>)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_planes(&text)
}

pub fn write_planes(path: impl AsRef<Path>, order: Order, planes: &[PartialPlane]) -> Result<()> {
    let path = path.as_ref();
    let text = format_planes(order, planes)?;
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Reads planes written as nested braces, e.g. `{{0, 1, 2}, {0, 3, 4}}`.
/// Characters other than braces, digits, commas and whitespace are
/// ignored, so LaTeX-escaped braces work too.
pub fn import_braces(text: &str, order: Order) -> Result<Vec<PartialPlane>> {
    let mut planes = Vec::new();
    let mut depth = 0usize;
    let mut lines: Vec<Line> = Vec::new();
    let mut points: Vec<usize> = Vec::new();
    let mut number: Option<usize> = None;
    let mut text_line = 1;

    for ch in text.chars() {
        if ch == '\n' {
            text_line += 1;
        }
        if let Some(d) = ch.to_digit(10) {
            if depth != 2 {
                return Err(parse_err(text_line, "number outside a line"));
            }
            number = Some(number.unwrap_or(0) * 10 + d as usize);
            continue;
        }
        if let Some(v) = number.take() {
            points.push(v);
        }
        match ch {
            '{' => {
                depth += 1;
                if depth > 2 {
                    return Err(parse_err(text_line, "braces nested too deeply"));
                }
            }
            '}' => match depth {
                2 => {
                    if points.len() != order.points_per_line() {
                        return Err(parse_err(
                            text_line,
                            format!("line with {} points at order {order}", points.len()),
                        ));
                    }
                    lines.push(
                        Line::new(points.drain(..))
                            .map_err(|e| parse_err(text_line, e.to_string()))?,
                    );
                    depth = 1;
                }
                1 => {
                    let i = planes.len();
                    let plane = PartialPlane::new(order, std::mem::take(&mut lines)).map_err(
                        |e| match e {
                            Error::Structural {
                                first,
                                second,
                                shared,
                                ..
                            } => Error::Structural {
                                plane: i,
                                first,
                                second,
                                shared,
                            },
                            other => other,
                        },
                    )?;
                    planes.push(plane);
                    depth = 0;
                }
                _ => return Err(parse_err(text_line, "unbalanced `}`")),
            },
            _ => {}
        }
    }
    if depth != 0 {
        return Err(parse_err(text_line, "unterminated braces"));
    }
    Ok(planes)
}
