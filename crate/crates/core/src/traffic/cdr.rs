//! Delimited CDR ingestion and spatial/temporal aggregation into a coarse
//! grid series.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{TrafficFrame, TrafficSeries};
use crate::error::{Error, Result};
use crate::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Delimiter {
    Comma,
    Tab,
}

impl Delimiter {
    fn as_char(self) -> char {
        match self {
            Delimiter::Comma => ',',
            Delimiter::Tab => '\t',
        }
    }
}

/// Column layout of a CDR file. Milan-format files are tab-delimited with the
/// grid id in column 0, the epoch-millisecond timestamp in column 1 and the
/// internet activity in column 7; that is the default.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CdrSchema {
    pub grid_col: usize,
    pub time_col: usize,
    pub value_col: usize,
    #[serde(default = "default_delimiter")]
    pub delimiter: Delimiter,
    /// First valid grid id (1 for Milan).
    #[serde(default = "default_origin")]
    pub grid_id_origin: u64,
    /// Number of micro grids; ids outside `[origin, origin + n)` are a range
    /// error.
    pub n_grids: usize,
}

fn default_delimiter() -> Delimiter {
    Delimiter::Tab
}

fn default_origin() -> u64 {
    1
}

impl CdrSchema {
    pub fn milan(n_grids: usize) -> Self {
        CdrSchema {
            grid_col: 0,
            time_col: 1,
            value_col: 7,
            delimiter: Delimiter::Tab,
            grid_id_origin: 1,
            n_grids,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CdrRecord {
    /// Zero-based micro-grid index.
    pub grid: usize,
    pub timestamp_ms: i64,
    pub value: Real,
}

pub fn load_cdr(path: impl AsRef<Path>, schema: &CdrSchema) -> Result<Vec<CdrRecord>> {
    load_cdr_reader(File::open(path)?, schema)
}

pub fn load_cdr_reader<R: Read>(reader: R, schema: &CdrSchema) -> Result<Vec<CdrRecord>> {
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_line(&line, schema, line_no)?);
    }
    Ok(out)
}

fn parse_line(line: &str, schema: &CdrSchema, line_no: usize) -> Result<CdrRecord> {
    let fields: Vec<&str> = line.split(schema.delimiter.as_char()).collect();
    let need = schema.grid_col.max(schema.time_col).max(schema.value_col) + 1;
    if fields.len() < need {
        return Err(Error::Parse {
            line: line_no,
            msg: format!("expected at least {need} fields, found {}", fields.len()),
        });
    }
    let grid_id: u64 = fields[schema.grid_col].trim().parse().map_err(|e| Error::Parse {
        line: line_no,
        msg: format!("bad grid id `{}`: {e}", fields[schema.grid_col]),
    })?;
    let timestamp_ms: i64 = fields[schema.time_col].trim().parse().map_err(|e| Error::Parse {
        line: line_no,
        msg: format!("bad timestamp `{}`: {e}", fields[schema.time_col]),
    })?;
    // absent measurement means zero traffic
    let raw_value = fields[schema.value_col].trim();
    let value: Real = if raw_value.is_empty() {
        0.0
    } else {
        raw_value.parse().map_err(|e| Error::Parse {
            line: line_no,
            msg: format!("bad traffic value `{raw_value}`: {e}"),
        })?
    };
    if grid_id < schema.grid_id_origin
        || grid_id >= schema.grid_id_origin + schema.n_grids as u64
    {
        return Err(Error::Range(format!(
            "line {line_no}: grid id {grid_id} outside [{}, {})",
            schema.grid_id_origin,
            schema.grid_id_origin + schema.n_grids as u64
        )));
    }
    Ok(CdrRecord {
        grid: (grid_id - schema.grid_id_origin) as usize,
        timestamp_ms,
        value,
    })
}

/// How raw records map onto the coarse series.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AggregateSpec {
    /// Micro grid dims, row-major ids: `grid = x * micro_ny + y`.
    pub micro_nx: usize,
    pub micro_ny: usize,
    /// Coarse cell = `spatial_factor x spatial_factor` micro grids.
    pub spatial_factor: usize,
    /// Coarse slot = `temporal_factor` micro slots.
    pub temporal_factor: usize,
    pub micro_slot_minutes: u32,
    /// Epoch ms of micro slot 0.
    pub time_origin_ms: i64,
    pub n_micro_slots: usize,
}

/// Sum records into the coarse grid/slot cells. Traffic volume is extensive,
/// so both the spatial and the temporal reduction are sums.
pub fn aggregate(records: &[CdrRecord], spec: &AggregateSpec) -> Result<TrafficSeries> {
    if spec.spatial_factor == 0 || spec.micro_nx % spec.spatial_factor != 0 || spec.micro_ny % spec.spatial_factor != 0
    {
        return Err(Error::Argument(format!(
            "micro dims {}x{} must be divisible by the spatial factor {}",
            spec.micro_nx, spec.micro_ny, spec.spatial_factor
        )));
    }
    if spec.temporal_factor == 0 || spec.n_micro_slots % spec.temporal_factor != 0 {
        return Err(Error::Argument(format!(
            "micro slot count {} must be divisible by the temporal factor {}",
            spec.n_micro_slots, spec.temporal_factor
        )));
    }
    let nx = spec.micro_nx / spec.spatial_factor;
    let ny = spec.micro_ny / spec.spatial_factor;
    let n_slots = spec.n_micro_slots / spec.temporal_factor;
    let slot_ms = spec.micro_slot_minutes as i64 * 60_000;

    let mut grids: Vec<Array2<Real>> = vec![Array2::zeros((nx, ny)); n_slots];
    for rec in records {
        let offset = rec.timestamp_ms - spec.time_origin_ms;
        if offset < 0 {
            return Err(Error::Range(format!(
                "record at {} ms precedes the time origin",
                rec.timestamp_ms
            )));
        }
        let micro_slot = (offset / slot_ms) as usize;
        if micro_slot >= spec.n_micro_slots {
            return Err(Error::Range(format!(
                "record at {} ms is past micro slot {}",
                rec.timestamp_ms, spec.n_micro_slots
            )));
        }
        let mx = rec.grid / spec.micro_ny;
        let my = rec.grid % spec.micro_ny;
        if mx >= spec.micro_nx {
            return Err(Error::Range(format!(
                "grid index {} outside the {}x{} micro grid",
                rec.grid, spec.micro_nx, spec.micro_ny
            )));
        }
        let slot = micro_slot / spec.temporal_factor;
        grids[slot][[mx / spec.spatial_factor, my / spec.spatial_factor]] += rec.value;
    }

    let frames = grids
        .into_iter()
        .enumerate()
        .map(|(i, g)| TrafficFrame::new(g, i as u64))
        .collect::<Result<Vec<_>>>()?;
    TrafficSeries::new(frames, spec.micro_slot_minutes * spec.temporal_factor as u32)
}
