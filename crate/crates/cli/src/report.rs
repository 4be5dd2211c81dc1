use std::path::Path;

use serde::Serialize;

use crate::Failure;

/// A number as emitted in JSON: value, unit and the name of the quantity.
#[derive(Serialize)]
pub struct Quantity {
    pub value: f64,
    pub unit: &'static str,
    pub quantity: &'static str,
}

pub fn qty(value: f64, unit: &'static str, quantity: &'static str) -> Quantity {
    Quantity { value, unit, quantity }
}

pub const DIMLESS: &str = "1";
pub const LENGTH: &str = "L";
pub const INV_L4: &str = "L^-4";
pub const VOLUME: &str = "L^4";

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), Failure> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Failure::Run(e.to_string()))?;
    s.push('\n');
    std::fs::write(dir.join(name), s)?;
    Ok(())
}

pub fn write_csv<R: Serialize>(dir: &Path, name: &str, rows: impl IntoIterator<Item = R>) -> Result<(), Failure> {
    let mut w = csv::Writer::from_path(dir.join(name)).map_err(|e| Failure::Run(e.to_string()))?;
    for r in rows {
        w.serialize(r).map_err(|e| Failure::Run(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
