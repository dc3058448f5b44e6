//! CSV tables for external plotting. Column names are stable; an absent
//! quote side is written as an empty field. Floats use the shortest
//! representation that round-trips.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::params::Variant;
use crate::quotes::{
    gaussian_approximation, optimal_quote_row, taylor_quotes_near_t, AsymptoticSolution, QuotePair,
};
use crate::simulator::Simulation;
use crate::statics::StaticsReport;
use crate::value::ValueLadder;

#[derive(Serialize)]
struct SurfaceRow {
    t: f64,
    q: i32,
    delta_b: Option<f64>,
    delta_a: Option<f64>,
    psi: Option<f64>,
}

/// Columns `t,q,delta_b,delta_a,psi`.
pub fn write_quote_surface<W: Write>(ladder: &ValueLadder, times: &[f64], writer: W) -> Result<()> {
    let params = ladder.params();
    let mut w = csv::Writer::from_writer(writer);
    for &t in times {
        for (i, qp) in optimal_quote_row(ladder, t)?.into_iter().enumerate() {
            w.serialize(SurfaceRow {
                t,
                q: params.inventory_at(i),
                delta_b: qp.delta_b,
                delta_a: qp.delta_a,
                psi: qp.spread,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct AsymptoticRow {
    q: i32,
    f0: f64,
    ln_f0: f64,
    delta_b_inf: Option<f64>,
    delta_a_inf: Option<f64>,
    psi_inf: Option<f64>,
    delta_b_gauss: Option<f64>,
    delta_a_gauss: Option<f64>,
    psi_gauss: Option<f64>,
}

/// Columns `q,f0,ln_f0,delta_b_inf,delta_a_inf,psi_inf,delta_b_gauss,delta_a_gauss,psi_gauss`.
pub fn write_asymptotic_table<W: Write>(
    ladder: &ValueLadder,
    solution: &AsymptoticSolution,
    writer: W,
) -> Result<()> {
    let params = ladder.params();
    let variant = ladder.matrix().variant();
    let mut w = csv::Writer::from_writer(writer);
    for (i, qp) in solution.quotes_by_q.iter().enumerate() {
        let q = params.inventory_at(i);
        let g = gaussian_approximation(params, variant, q);
        w.serialize(AsymptoticRow {
            q,
            f0: solution.f0[i],
            ln_f0: solution.f0_log[i],
            delta_b_inf: qp.delta_b,
            delta_a_inf: qp.delta_a,
            psi_inf: qp.spread,
            delta_b_gauss: g.delta_b,
            delta_a_gauss: g.delta_a,
            psi_gauss: g.spread,
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ApproxRow {
    t: f64,
    q: i32,
    delta_b: Option<f64>,
    delta_a: Option<f64>,
    psi: Option<f64>,
    delta_b_taylor: Option<f64>,
    delta_a_taylor: Option<f64>,
    psi_taylor: Option<f64>,
    delta_b_gauss: Option<f64>,
    delta_a_gauss: Option<f64>,
    psi_gauss: Option<f64>,
}

/// Optimal quotes next to the near-terminal and Gaussian approximations.
/// Columns `t,q,delta_b,delta_a,psi,delta_b_taylor,delta_a_taylor,psi_taylor,
/// delta_b_gauss,delta_a_gauss,psi_gauss`. The Taylor columns are left empty
/// outside the base model.
pub fn write_approximations<W: Write>(
    ladder: &ValueLadder,
    times: &[f64],
    writer: W,
) -> Result<()> {
    let params = ladder.params();
    let variant = ladder.matrix().variant();
    let mut w = csv::Writer::from_writer(writer);
    for &t in times {
        for (i, qp) in optimal_quote_row(ladder, t)?.into_iter().enumerate() {
            let q = params.inventory_at(i);
            let taylor = match variant {
                Variant::Base => taylor_quotes_near_t(params, t, q)?,
                Variant::Drift | Variant::Impact => QuotePair::silent(),
            };
            let g = gaussian_approximation(params, variant, q);
            w.serialize(ApproxRow {
                t,
                q,
                delta_b: qp.delta_b,
                delta_a: qp.delta_a,
                psi: qp.spread,
                delta_b_taylor: taylor.delta_b,
                delta_a_taylor: taylor.delta_a,
                psi_taylor: taylor.spread,
                delta_b_gauss: g.delta_b,
                delta_a_gauss: g.delta_a,
                psi_gauss: g.spread,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct StaticsCsvRow {
    parameter: &'static str,
    q: i32,
    side: &'static str,
    derivative: f64,
    sign: i8,
    expected_sign: Option<i8>,
    agrees: Option<bool>,
}

/// Columns `parameter,q,side,derivative,sign,expected_sign,agrees`.
pub fn write_statics<W: Write>(report: &StaticsReport, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in &report.rows {
        w.serialize(StaticsCsvRow {
            parameter: r.parameter.name(),
            q: r.q,
            side: r.side.name(),
            derivative: r.derivative,
            sign: r.sign,
            expected_sign: r.expected_sign,
            agrees: r.agrees(),
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct PathRow {
    path: usize,
    t: f64,
    price: f64,
    cash: f64,
    inventory: i32,
}

/// Recorded trajectories, columns `path,t,price,cash,inventory`.
pub fn write_sim_paths<W: Write>(sim: &Simulation, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for (p, path) in sim.paths.iter().enumerate() {
        for i in 0..path.times.len() {
            w.serialize(PathRow {
                path: p,
                t: path.times[i],
                price: path.prices[i],
                cash: path.cash[i],
                inventory: path.inventory[i],
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes any slice of flat records with a header derived from field names.
pub fn write_records<W: Write, T: Serialize>(rows: &[T], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
