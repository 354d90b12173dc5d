//! CSV and JSON result tables, written row by row.

use std::io::{self, Write};

use corrsurf::RunStats;

use crate::args::Format;

pub const CSV_HEADER: [&str; 17] = [
    "model",
    "d",
    "p",
    "shots",
    "T",
    "failures_x",
    "p_shot_x",
    "p_l_x",
    "ci_low_x",
    "ci_high_x",
    "failures_z",
    "p_shot_z",
    "p_l_z",
    "ci_low_z",
    "ci_high_z",
    "seed",
    "seconds",
];

/// Fields in header order. Floats use Rust's shortest round-trip form.
pub fn csv_fields(s: &RunStats) -> [String; 17] {
    [
        s.model.clone(),
        s.d.to_string(),
        s.p.to_string(),
        s.shots.to_string(),
        s.rounds.to_string(),
        s.failures_x.to_string(),
        s.p_shot_x.to_string(),
        s.p_l_x.to_string(),
        s.ci_low_x.to_string(),
        s.ci_high_x.to_string(),
        s.failures_z.to_string(),
        s.p_shot_z.to_string(),
        s.p_l_z.to_string(),
        s.ci_low_z.to_string(),
        s.ci_high_z.to_string(),
        s.seed.to_string(),
        s.seconds.to_string(),
    ]
}

/// Streams rows as they arrive; `finish` closes the table.
pub struct RowWriter<W: Write> {
    inner: Inner<W>,
}

enum Inner<W: Write> {
    Csv(Box<csv::Writer<W>>),
    Json { out: W, rows: usize },
}

impl<W: Write> RowWriter<W> {
    /// `header` is false when appending to an existing CSV.
    pub fn new(format: Format, out: W, header: bool) -> io::Result<Self> {
        let inner = match format {
            Format::Csv => {
                let mut w = csv::WriterBuilder::new()
                    .has_headers(false)
                    .from_writer(out);
                if header {
                    w.write_record(CSV_HEADER)?;
                    w.flush()?;
                }
                Inner::Csv(Box::new(w))
            }
            Format::Json => Inner::Json { out, rows: 0 },
        };
        Ok(Self { inner })
    }

    pub fn write(&mut self, row: &RunStats) -> io::Result<()> {
        match &mut self.inner {
            Inner::Csv(w) => {
                w.write_record(csv_fields(row))?;
                w.flush()
            }
            Inner::Json { out, rows } => {
                out.write_all(if *rows == 0 { b"[\n  " } else { b",\n  " })?;
                serde_json::to_writer(&mut *out, row)?;
                *rows += 1;
                out.flush()
            }
        }
    }

    pub fn finish(self) -> io::Result<W> {
        match self.inner {
            Inner::Csv(w) => w.into_inner().map_err(|e| e.into_error()),
            Inner::Json { mut out, rows } => {
                out.write_all(if rows == 0 { b"[]\n" } else { b"\n]\n" })?;
                out.flush()?;
                Ok(out)
            }
        }
    }
}

/// Write a whole table.
pub fn emit<W: Write>(rows: &[RunStats], format: Format, out: W) -> io::Result<W> {
    let mut w = RowWriter::new(format, out, true)?;
    for row in rows {
        w.write(row)?;
    }
    w.finish()
}
