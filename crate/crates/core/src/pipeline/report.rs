//! CSV output and RD-curve input.

use std::io::{Read, Write};

use super::metrics::RdPoint;
use super::run::{GroupRow, ScenePlan, SynthesizedView};
use crate::allowable::AllowableInterval;
use crate::error::{Error, Result};
use crate::optimizer::SweepPoint;

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse(format!("{other:?}")),
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

/// Columns `v,lo,hi`.
pub fn write_ranges<W: Write>(out: W, table: &[AllowableInterval]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["v", "lo", "hi"]).map_err(csv_err)?;
    for (v, iv) in table.iter().enumerate() {
        w.write_record([v.to_string(), iv.lo().to_string(), iv.hi().to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// One row per group. `xs` and `dv` are space separated, winner last.
pub fn write_groups<W: Write>(out: W, rows: &[GroupRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["group", "y", "target", "size", "xs", "dv", "rate", "distortion", "true_cost"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.id.to_string(),
            r.y.to_string(),
            r.target.to_string(),
            r.xs.len().to_string(),
            join(&r.xs),
            join(&r.dv),
            r.rate.to_string(),
            r.distortion.to_string(),
            r.true_cost.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Per-state tables of every group member. Pixel ids are `group:member`.
pub fn write_tables<W: Write>(out: W, plan: &ScenePlan) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["pixel", "x", "y", "v", "dv", "p", "distortion", "rate"])
        .map_err(csv_err)?;
    for (g, (site, tables)) in plan.sites.iter().zip(&plan.problem.groups).enumerate() {
        for (m, (x, t)) in site.xs.iter().zip(tables).enumerate() {
            for dv in t.states() {
                w.write_record([
                    format!("{g}:{m}"),
                    x.to_string(),
                    site.y.to_string(),
                    t.v.to_string(),
                    dv.to_string(),
                    t.p(dv).to_string(),
                    t.d(dv).to_string(),
                    t.r(dv).to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Occupied virtual samples and the source column that won each.
pub fn write_winners<W: Write>(out: W, view: &SynthesizedView) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["y", "target", "source_x", "sample"]).map_err(csv_err)?;
    let (vw, h) = view.image.dims();
    for y in 0..h {
        for t in 0..vw {
            if let Some(x) = view.winners.get(t, y) {
                w.write_record([
                    y.to_string(),
                    t.to_string(),
                    x.to_string(),
                    view.image.get(t, y).to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep<W: Write>(out: W, points: &[SweepPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda", "rate", "distortion"]).map_err(csv_err)?;
    for p in points {
        w.write_record([p.lambda.to_string(), p.rate.to_string(), p.distortion.to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `rate,quality` rows with a header line.
pub fn read_rd_curve<R: Read>(input: R) -> Result<Vec<RdPoint>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = r.headers().map_err(csv_err)?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse(format!("missing column {name:?}")))
    };
    let (ri, qi) = (col("rate")?, col("quality")?);
    let mut points = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let num = |i: usize| -> Result<f64> {
            let s = rec.get(i).unwrap_or("");
            s.parse().map_err(|_| Error::Parse(format!("not a number: {s:?}")))
        };
        let rate = num(ri)?;
        if rate < 0.0 {
            return Err(Error::InvalidCurve(format!("negative rate {rate}")));
        }
        points.push(RdPoint {
            rate,
            quality: num(qi)?,
        });
    }
    Ok(points)
}
