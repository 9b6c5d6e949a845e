//! Text formats: JSON for structured inputs, CSV for contours and bulk rows.
//!
//! Every parser takes the whole input as a string (or reader) and validates
//! the decoded values, so malformed files surface as `Error::Malformed` or a
//! domain error rather than a panic further down.

use std::io::{Read, Write};

use nalgebra::Point2;
use serde::Deserialize;

use crate::conic::Conic;
use crate::ellipse_fit::ContourPoints;
use crate::error::{Error, Result};
use crate::intrinsics::{CameraIntrinsics, DeviceSample, FocalModel};
use crate::simulator::observations::ObservationSet;
use crate::simulator::{ExperimentConfig, TrialRecord};

#[derive(Deserialize)]
#[serde(untagged)]
enum DevicesFile {
    List(Vec<DeviceSample>),
    Wrapped { devices: Vec<DeviceSample> },
}

/// Either a bare array of `{device, f35_mm}` or `{"devices": [...]}`.
pub fn parse_devices_json(text: &str) -> Result<Vec<DeviceSample>> {
    let devices = match serde_json::from_str::<DevicesFile>(text)? {
        DevicesFile::List(d) | DevicesFile::Wrapped { devices: d } => d,
    };
    if devices.is_empty() {
        return Err(Error::Malformed("device list is empty".into()));
    }
    if let Some(d) = devices
        .iter()
        .find(|d| !(d.f35_mm.is_finite() && d.f35_mm > 0.0))
    {
        return Err(Error::Malformed(format!(
            "device {:?}: f35_mm must be positive, got {}",
            d.device, d.f35_mm
        )));
    }
    Ok(devices)
}

/// Accepts `{"m": [[..],[..],[..]]}`, `{"coeffs": [a,b,c,d,e,f]}` or a bare
/// array of six coefficients (`ax² + bxy + cy² + dx + ey + f`).
pub fn parse_conic_json(text: &str) -> Result<Conic> {
    Ok(serde_json::from_str(text)?)
}

pub fn parse_intrinsics_json(text: &str) -> Result<CameraIntrinsics> {
    let k: CameraIntrinsics = serde_json::from_str(text)?;
    k.validate()?;
    Ok(k)
}

pub fn parse_focal_model_json(text: &str) -> Result<FocalModel> {
    let m: FocalModel = serde_json::from_str(text)?;
    if !(m.mean_f35.is_finite() && m.mean_f35 > 0.0 && m.var_f35.is_finite() && m.var_f35 >= 0.0) {
        return Err(Error::Malformed(
            "focal model needs a positive mean and non-negative variance".into(),
        ));
    }
    Ok(m)
}

pub fn parse_experiment_config(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = serde_json::from_str(text)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_observations_json(text: &str) -> Result<ObservationSet> {
    let set: ObservationSet = serde_json::from_str(text)?;
    set.validate()?;
    Ok(set)
}

#[derive(Deserialize)]
struct CsvPoint {
    x: f64,
    y: f64,
}

/// CSV with a header row containing `x` and `y` (pixels); other columns are ignored.
pub fn read_contour_csv<R: Read>(reader: R) -> Result<ContourPoints> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if !(headers.iter().any(|h| h == "x") && headers.iter().any(|h| h == "y")) {
        return Err(Error::Malformed("contour CSV needs an x,y header".into()));
    }
    let mut pts = Vec::new();
    for row in rdr.deserialize::<CsvPoint>() {
        let p = row?;
        pts.push(Point2::new(p.x, p.y));
    }
    ContourPoints::new(pts)
}

pub fn parse_contour_csv(text: &str) -> Result<ContourPoints> {
    read_contour_csv(text.as_bytes())
}

pub fn write_contour_csv<W: Write>(pts: &[Point2<f64>], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["x", "y"])?;
    for p in pts {
        wtr.write_record([format!("{:.17e}", p.x), format!("{:.17e}", p.y)])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_trial_csv<W: Write>(rows: &[TrialRecord], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r)?;
    }
    if rows.is_empty() {
        wtr.write_record(TrialRecord::HEADER)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_trial_csv<R: Read>(reader: R) -> Result<Vec<TrialRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}
