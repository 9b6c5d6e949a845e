//! Square-pixel, centered-principal-point camera model and the default focal
//! model fitted on a population of devices.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::conic::Conic;
use crate::error::{Error, Result};

/// Diagonal of a 36×24 mm full-frame sensor, in millimetres.
pub const FULL_FRAME_DIAGONAL_MM: f64 = 43.27;
/// Width of a 36×24 mm full-frame sensor, in millimetres.
pub const FULL_FRAME_WIDTH_MM: f64 = 36.0;

static BUILTIN_DEVICES: &str = include_str!("../data/devices.json");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    /// Focal length in pixels.
    pub f_px: f64,
    pub width_px: u32,
    pub height_px: u32,
}

impl CameraIntrinsics {
    pub fn new(f_px: f64, width_px: u32, height_px: u32) -> Result<Self> {
        let k = Self {
            f_px,
            width_px,
            height_px,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f_px.is_finite() && self.f_px > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "focal length must be positive, got {}",
                self.f_px
            )));
        }
        if self.width_px == 0 || self.height_px == 0 {
            return Err(Error::InvalidArgument("image size must be positive".into()));
        }
        Ok(())
    }

    pub fn principal_point(&self) -> (f64, f64) {
        (self.width_px as f64 / 2.0, self.height_px as f64 / 2.0)
    }

    pub fn k(&self) -> Matrix3<f64> {
        let (cx, cy) = self.principal_point();
        Matrix3::new(self.f_px, 0.0, cx, 0.0, self.f_px, cy, 0.0, 0.0, 1.0)
    }

    pub fn k_inv(&self) -> Matrix3<f64> {
        let (cx, cy) = self.principal_point();
        let f = self.f_px;
        Matrix3::new(1.0 / f, 0.0, -cx / f, 0.0, 1.0 / f, -cy / f, 0.0, 0.0, 1.0)
    }

    /// Image of the absolute conic, `ω = K⁻ᵀK⁻¹`.
    pub fn iac(&self) -> Conic {
        let ki = self.k_inv();
        Conic::new(ki.transpose() * ki).expect("K is invertible")
    }

    /// Same camera with the focal length multiplied by `factor`.
    pub fn focal_modifier(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "focal modifier must be positive, got {factor}"
            )));
        }
        Ok(Self {
            f_px: self.f_px * factor,
            ..*self
        })
    }
}

/// How a 35 mm-equivalent focal length maps onto the sensor.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SensorConvention {
    /// Image diagonal ↔ 43.27 mm.
    #[default]
    Diagonal,
    /// Image width ↔ 36 mm.
    Width,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceSample {
    pub device: String,
    pub f35_mm: f64,
}

/// Gaussian model of the 35 mm-equivalent focal length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocalModel {
    pub mean_f35: f64,
    pub var_f35: f64,
    #[serde(default)]
    pub samples: Vec<DeviceSample>,
}

impl FocalModel {
    /// Model fitted on the device list shipped with the crate.
    pub fn builtin() -> Self {
        let devices = crate::io::parse_devices_json(BUILTIN_DEVICES).expect("builtin device list");
        Self::from_devices(devices).expect("builtin device list has enough samples")
    }

    pub fn from_devices(devices: Vec<DeviceSample>) -> Result<Self> {
        let values: Vec<f64> = devices.iter().map(|d| d.f35_mm).collect();
        let mut model = fit_focal_model(&values)?;
        model.samples = devices;
        Ok(model)
    }

    pub fn std_f35(&self) -> f64 {
        self.var_f35.sqrt()
    }
}

/// Arithmetic mean and unbiased (n − 1) variance.
pub fn fit_focal_model(samples: &[f64]) -> Result<FocalModel> {
    if samples.len() < 2 {
        return Err(Error::TooFewSamples);
    }
    if let Some(bad) = samples.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "focal sample must be positive, got {bad}"
        )));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(FocalModel {
        mean_f35: mean,
        var_f35: var,
        samples: Vec::new(),
    })
}

pub fn default_intrinsics(
    width_px: u32,
    height_px: u32,
    model: &FocalModel,
) -> Result<CameraIntrinsics> {
    default_intrinsics_with(width_px, height_px, model, SensorConvention::Diagonal)
}

pub fn default_intrinsics_with(
    width_px: u32,
    height_px: u32,
    model: &FocalModel,
    convention: SensorConvention,
) -> Result<CameraIntrinsics> {
    if width_px == 0 || height_px == 0 {
        return Err(Error::InvalidArgument("image size must be positive".into()));
    }
    let (w, h) = (width_px as f64, height_px as f64);
    let f_px = match convention {
        SensorConvention::Diagonal => model.mean_f35 * w.hypot(h) / FULL_FRAME_DIAGONAL_MM,
        SensorConvention::Width => model.mean_f35 * w / FULL_FRAME_WIDTH_MM,
    };
    CameraIntrinsics::new(f_px, width_px, height_px)
}
