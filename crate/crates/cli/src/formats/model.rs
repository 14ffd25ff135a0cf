//! Versioned VAR model document for golden-file testing and audits.

use spillover_core::linalg::Mat;
use spillover_core::var::VarModel;

use crate::error::{CliError, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelDocument {
    pub format_version: u32,
    pub locations: Vec<String>,
    pub lag_order: usize,
    pub t_eff: usize,
    pub intercept: Vec<f64>,
    /// Row-major N x N blocks, one per lag.
    pub phi: Vec<Vec<f64>>,
    /// Row-major N x N residual covariance.
    pub sigma: Vec<f64>,
}

pub fn to_document(model: &VarModel) -> ModelDocument {
    ModelDocument {
        format_version: MODEL_FORMAT_VERSION,
        locations: model.locations.clone(),
        lag_order: model.lag_order,
        t_eff: model.t_eff,
        intercept: model.intercept.clone(),
        phi: model.coeffs.iter().map(|m| m.data().to_vec()).collect(),
        sigma: model.sigma.data().to_vec(),
    }
}

pub fn to_json(model: &VarModel) -> Result<String> {
    let mut text = serde_json::to_string_pretty(&to_document(model))
        .map_err(|e| CliError::data(format!("model serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

pub fn from_json(bytes: &[u8]) -> Result<VarModel> {
    let doc: ModelDocument = serde_json::from_slice(bytes)
        .map_err(|e| CliError::data(format!("cannot parse model document: {e}")))?;
    if doc.format_version != MODEL_FORMAT_VERSION {
        return Err(CliError::data(format!(
            "unsupported model document version {}",
            doc.format_version
        )));
    }
    let n = doc.locations.len();
    if doc.phi.len() != doc.lag_order || doc.sigma.len() != n * n {
        return Err(CliError::data("model document shape mismatch"));
    }
    Ok(VarModel {
        lag_order: doc.lag_order,
        intercept: doc.intercept,
        coeffs: doc
            .phi
            .into_iter()
            .map(|data| Mat::from_vec(n, n, data))
            .collect(),
        sigma: Mat::from_vec(n, n, doc.sigma),
        t_eff: doc.t_eff,
        locations: doc.locations,
    })
}
