//! Rendering placements as ASCII layouts and scanning layouts back into
//! coordinates.
//!
//! All three formats share one cell geometry: one text cell per grid cell,
//! labels of co-located entities stacked alphabetically (`"AF"`). Output uses
//! LF line breaks and carries no trailing newline.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spatial::{Entity, Placement};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AsciiError {
    #[error("malformed grid: border line {line} has {found} cells, expected {expected}")]
    MalformedGrid { line: usize, expected: usize, found: usize },
    #[error("unknown ascii format {0:?}")]
    UnknownFormat(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AsciiFormat {
    /// Borderless, one 3-character field per cell.
    Simple,
    /// Bordered with `+`, `-` and `|`.
    Grid,
    /// Bordered with box-drawing characters.
    Panel,
}

impl AsciiFormat {
    pub const ALL: [AsciiFormat; 3] = [AsciiFormat::Simple, AsciiFormat::Grid, AsciiFormat::Panel];

    pub fn as_str(self) -> &'static str {
        match self {
            AsciiFormat::Simple => "simple",
            AsciiFormat::Grid => "grid",
            AsciiFormat::Panel => "panel",
        }
    }
}

impl fmt::Display for AsciiFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AsciiFormat {
    type Err = AsciiError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AsciiFormat::ALL
            .into_iter()
            .find(|f| f.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| AsciiError::UnknownFormat(s.to_string()))
    }
}

/// Field width of the simple format, and the default raw-mode column divisor.
pub const SIMPLE_FIELD_WIDTH: usize = 3;

struct Frame {
    left: char,
    junction: char,
    right: char,
}

struct BoxChars {
    top: Frame,
    middle: Frame,
    bottom: Frame,
    horizontal: char,
    vertical: char,
}

const GRID_CHARS: BoxChars = BoxChars {
    top: Frame { left: '+', junction: '+', right: '+' },
    middle: Frame { left: '+', junction: '+', right: '+' },
    bottom: Frame { left: '+', junction: '+', right: '+' },
    horizontal: '-',
    vertical: '|',
};

const PANEL_CHARS: BoxChars = BoxChars {
    top: Frame { left: '┌', junction: '┬', right: '┐' },
    middle: Frame { left: '├', junction: '┼', right: '┤' },
    bottom: Frame { left: '└', junction: '┴', right: '┘' },
    horizontal: '─',
    vertical: '│',
};

/// Label stacks per cell, row-major.
fn cell_stacks(p: &Placement) -> Vec<Vec<String>> {
    let (rows, cols) = p.dimensions();
    let mut cells = vec![vec![String::new(); cols]; rows];
    for (e, &(r, c)) in p.coords() {
        cells[r][c].push(e.as_char());
    }
    cells
}

pub fn render(p: &Placement, format: AsciiFormat) -> String {
    let cells = cell_stacks(p);
    match format {
        AsciiFormat::Simple => render_simple(&cells),
        AsciiFormat::Grid => render_boxed(&cells, &GRID_CHARS),
        AsciiFormat::Panel => render_boxed(&cells, &PANEL_CHARS),
    }
}

fn render_simple(cells: &[Vec<String>]) -> String {
    cells
        .iter()
        .map(|row| {
            let line: String = row
                .iter()
                .map(|s| format!("{s:<width$}", width = SIMPLE_FIELD_WIDTH))
                .collect();
            line.trim_end().to_string()
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn render_boxed(cells: &[Vec<String>], chars: &BoxChars) -> String {
    if cells.is_empty() {
        return String::new();
    }
    let cols = cells[0].len();
    let width = cells
        .iter()
        .flatten()
        .map(|s| s.chars().count() + 1)
        .max()
        .unwrap_or(0)
        .max(2);
    let border = |frame: &Frame| {
        let segment: String = std::iter::repeat_n(chars.horizontal, width).collect();
        let mut line = String::new();
        line.push(frame.left);
        line.push_str(&vec![segment; cols].join(&frame.junction.to_string()));
        line.push(frame.right);
        line
    };
    let mut lines = vec![border(&chars.top)];
    for (i, row) in cells.iter().enumerate() {
        let mut line = String::new();
        line.push(chars.vertical);
        for cell in row {
            line.push_str(&format!("{cell:<width$}"));
            line.push(chars.vertical);
        }
        lines.push(line);
        lines.push(border(if i + 1 == cells.len() { &chars.bottom } else { &chars.middle }));
    }
    lines.join("\n")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanOptions {
    /// Characters per column bucket in raw (borderless) mode.
    pub raw_column_width: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            raw_column_width: SIMPLE_FIELD_WIDTH,
        }
    }
}

/// Normalized letter coordinates found in a layout.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Scan {
    pub positions: BTreeMap<Entity, (usize, usize)>,
    /// Letters seen more than once; only the first occurrence is kept.
    pub duplicates: Vec<Entity>,
    pub bordered: bool,
}

impl Scan {
    pub fn placement(&self) -> Placement {
        Placement::new(self.positions.clone())
    }
}

pub fn scan_coordinates(text: &str) -> Result<Scan, AsciiError> {
    scan_coordinates_with(text, &ScanOptions::default())
}

fn is_border_start(c: char) -> bool {
    matches!(c, '+' | '┌' | '├' | '└')
}

fn is_junction(c: char) -> bool {
    matches!(c, '+' | '┌' | '┬' | '┐' | '├' | '┼' | '┤' | '└' | '┴' | '┘')
}

fn is_delimiter(c: char) -> bool {
    c == '|' || c == '│'
}

pub fn scan_coordinates_with(text: &str, opts: &ScanOptions) -> Result<Scan, AsciiError> {
    let lines: Vec<&str> = text.lines().collect();
    let border = |l: &str| l.trim_start().chars().next().is_some_and(is_border_start);
    let bordered = lines.iter().any(|l| border(l));

    let mut hits: Vec<(Entity, (usize, usize))> = Vec::new();
    if bordered {
        let mut expected: Option<usize> = None;
        for (i, line) in lines.iter().enumerate().filter(|(_, l)| border(l)) {
            let found = line.chars().filter(|&c| is_junction(c)).count().saturating_sub(1);
            match expected {
                None => expected = Some(found),
                Some(e) if e != found => {
                    return Err(AsciiError::MalformedGrid {
                        line: i + 1,
                        expected: e,
                        found,
                    })
                }
                _ => {}
            }
        }
        let first = lines.iter().position(|l| border(l)).unwrap_or(0);
        let last = lines.iter().rposition(|l| border(l)).unwrap_or(0);
        let content = lines[first..=last]
            .iter()
            .filter(|l| !border(l) && !l.trim().is_empty());
        for (row, line) in content.enumerate() {
            let trimmed = line.trim_start();
            let mut parts: Vec<&str> = trimmed.split(is_delimiter).collect();
            if trimmed.starts_with(is_delimiter) {
                parts.remove(0);
            }
            for (col, cell) in parts.iter().enumerate() {
                for ch in cell.chars().filter(char::is_ascii_uppercase) {
                    hits.push((Entity::new(ch).expect("uppercase"), (row, col)));
                }
            }
        }
    } else {
        let width = opts.raw_column_width.max(1);
        for (row, line) in lines.iter().enumerate() {
            for (i, ch) in line.chars().enumerate() {
                if ch.is_ascii_uppercase() {
                    hits.push((Entity::new(ch).expect("uppercase"), (row, i / width)));
                }
            }
        }
    }

    let mut scan = Scan {
        bordered,
        ..Scan::default()
    };
    for (e, pos) in hits {
        match scan.positions.entry(e) {
            std::collections::btree_map::Entry::Occupied(_) => {
                if !scan.duplicates.contains(&e) {
                    scan.duplicates.push(e);
                }
            }
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert(pos);
            }
        }
    }
    let min_row = scan.positions.values().map(|p| p.0).min().unwrap_or(0);
    let min_col = scan.positions.values().map(|p| p.1).min().unwrap_or(0);
    for pos in scan.positions.values_mut() {
        *pos = (pos.0 - min_row, pos.1 - min_col);
    }
    Ok(scan)
}
