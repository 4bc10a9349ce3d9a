//! Profile CSV and JSON persistence.
//!
//! Numbers are written as `{:.16e}` (17 significant digits), which parses
//! back to the identical `f64`. Lines end in `\n` regardless of platform.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::collocation::CosineExpansion;
use crate::error::{Error, Result};
use crate::model::Grid;
use crate::profile::WaveProfile;

/// CSV with header `x,psi,v`.
pub fn profile_csv(w: &WaveProfile) -> String {
    columns_csv(w, "x,psi,v", w.psi(), w.v())
}

/// CSV with header `x,u,eta` for time-dependent states.
pub fn state_csv(w: &WaveProfile) -> String {
    columns_csv(w, "x,u,eta", w.v(), w.psi())
}

fn columns_csv(w: &WaveProfile, header: &str, first: &[f64], second: &[f64]) -> String {
    let grid = w.grid();
    let mut out = String::with_capacity(64 * grid.n_points());
    out.push_str(header);
    out.push('\n');
    for j in 0..grid.n_points() {
        writeln!(out, "{:.16e},{:.16e},{:.16e}", grid.x(j), first[j], second[j]).expect("writing to a String");
    }
    out
}

/// Parses `x,psi,v` text onto `grid`. Row count and abscissae must match.
pub fn parse_profile_csv(text: &str, grid: &Grid) -> Result<WaveProfile> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default().trim();
    if header != "x,psi,v" {
        return Err(Error::Config(format!(
            "profile CSV header must be `x,psi,v`, found `{header}`"
        )));
    }
    let mut psi = Vec::with_capacity(grid.n_points());
    let mut v = Vec::with_capacity(grid.n_points());
    for (row, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Config(format!(
                "profile CSV row {}: expected 3 columns",
                row + 2
            )));
        }
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("profile CSV row {}: {e}", row + 2)))
        };
        let x = num(fields[0])?;
        if psi.len() < grid.n_points() {
            let expect = grid.x(psi.len());
            if (x - expect).abs() > 1e-9 * grid.length() {
                return Err(Error::GridMismatch(format!(
                    "profile row {} has x = {x}, grid expects {expect}",
                    row + 2
                )));
            }
        }
        psi.push(num(fields[1])?);
        v.push(num(fields[2])?);
    }
    if psi.len() != grid.n_points() {
        return Err(Error::GridMismatch(format!(
            "profile has {} rows, grid has {} points",
            psi.len(),
            grid.n_points()
        )));
    }
    WaveProfile::new(*grid, psi, v)
}

/// Loads a steady profile from either `x,psi,v` CSV or a coefficients JSON
/// file (chosen by extension), sampled on `grid`.
pub fn load_profile(path: &Path, grid: &Grid) -> Result<WaveProfile> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read profile {}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e == "json") {
        let e: CosineExpansion = serde_json::from_str(&text)?;
        if (2.0 * e.half_length() - grid.length()).abs() > 1e-12 * grid.length() || e.n_points() != grid.n_points() {
            return Err(Error::GridMismatch(format!(
                "coefficients describe L = {}, N = {}; config has L = {}, N = {}",
                2.0 * e.half_length(),
                e.n_points(),
                grid.length(),
                grid.n_points()
            )));
        }
        Ok(e.to_profile())
    } else {
        parse_profile_csv(&text, grid)
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}
