//! Trade-by-trade tape: CSV ingestion and emission.
//!
//! Format: header `timestamp,price,size[,best_bid,best_ask]`, timestamps in
//! decimal seconds, prices in quote currency.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeRecord {
    pub timestamp: f64,
    pub price: f64,
    pub size: f64,
    pub best_bid: Option<f64>,
    pub best_ask: Option<f64>,
}

impl TradeRecord {
    pub fn mid(&self) -> Option<f64> {
        match (self.best_bid, self.best_ask) {
            (Some(b), Some(a)) => Some(0.5 * (b + a)),
            _ => None,
        }
    }
}

/// Timestamp regressions up to this many seconds are reordered silently;
/// larger ones are rejected.
pub const ORDERING_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Default)]
pub struct Tape {
    pub records: Vec<TradeRecord>,
    pub has_quotes: bool,
    pub warnings: Vec<String>,
}

pub fn ingest_trades_file(path: impl AsRef<Path>) -> Result<Tape> {
    let file = std::fs::File::open(path)?;
    ingest_trades(file)
}

pub fn ingest_trades<R: Read>(reader: R) -> Result<Tape> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);

    let headers = rdr.headers()?.clone();
    if headers.is_empty() {
        return Ok(Tape {
            warnings: vec!["empty trade file".into()],
            ..Tape::default()
        });
    }
    let column = |name: &str| headers.iter().position(|h| h == name);
    let required = |name: &'static str| {
        column(name).ok_or_else(|| Error::Parse {
            line: 1,
            reason: format!("missing column `{name}`"),
        })
    };
    let ts_col = required("timestamp")?;
    let price_col = required("price")?;
    let size_col = required("size")?;
    let bid_col = column("best_bid");
    let ask_col = column("best_ask");
    if bid_col.is_some() != ask_col.is_some() {
        return Err(Error::Parse {
            line: 1,
            reason: "best_bid and best_ask must appear together".into(),
        });
    }

    let mut records: Vec<TradeRecord> = Vec::new();
    let mut previous = f64::NEG_INFINITY;
    let mut needs_sort = false;
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        let field = |col: usize, name: &str| -> Result<f64> {
            let raw = row.get(col).ok_or_else(|| Error::Parse {
                line,
                reason: format!("missing `{name}`"),
            })?;
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    line,
                    reason: format!("`{name}` is not a finite number: `{raw}`"),
                })
        };
        let optional = |col: Option<usize>, name: &str| -> Result<Option<f64>> {
            match col.and_then(|c| row.get(c)) {
                None | Some("") => Ok(None),
                Some(_) => field(col.unwrap(), name).map(Some),
            }
        };

        let timestamp = field(ts_col, "timestamp")?;
        let price = field(price_col, "price")?;
        let size = field(size_col, "size")?;
        if price <= 0.0 {
            return Err(Error::Parse {
                line,
                reason: format!("price must be > 0, got {price}"),
            });
        }
        if size <= 0.0 {
            return Err(Error::Parse {
                line,
                reason: format!("size must be > 0, got {size}"),
            });
        }
        let best_bid = optional(bid_col, "best_bid")?;
        let best_ask = optional(ask_col, "best_ask")?;
        if let (Some(b), Some(a)) = (best_bid, best_ask) {
            if b > a {
                return Err(Error::Parse {
                    line,
                    reason: format!("crossed quotes: best_bid {b} > best_ask {a}"),
                });
            }
        }

        if timestamp < previous {
            if previous - timestamp > ORDERING_TOLERANCE {
                return Err(Error::Ordering {
                    line,
                    timestamp,
                    previous,
                });
            }
            needs_sort = true;
        }
        previous = previous.max(timestamp);
        records.push(TradeRecord {
            timestamp,
            price,
            size,
            best_bid,
            best_ask,
        });
    }
    if needs_sort {
        records.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
    }

    let mut warnings = Vec::new();
    if records.is_empty() {
        warnings.push("trade file contains no records".into());
    }
    Ok(Tape {
        records,
        has_quotes: bid_col.is_some(),
        warnings,
    })
}

/// Writes records in the ingestion format. Quote columns are emitted when
/// any record carries them.
pub fn emit_trades<W: Write>(records: &[TradeRecord], writer: W) -> Result<()> {
    let with_quotes = records.iter().any(|r| r.best_bid.is_some());
    let mut w = csv::Writer::from_writer(writer);
    if with_quotes {
        w.write_record(["timestamp", "price", "size", "best_bid", "best_ask"])?;
    } else {
        w.write_record(["timestamp", "price", "size"])?;
    }
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for r in records {
        if with_quotes {
            w.write_record([
                r.timestamp.to_string(),
                r.price.to_string(),
                r.size.to_string(),
                opt(r.best_bid),
                opt(r.best_ask),
            ])?;
        } else {
            w.write_record([
                r.timestamp.to_string(),
                r.price.to_string(),
                r.size.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
