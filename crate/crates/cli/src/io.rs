//! File formats: single-column CSV for 1D signals, CSV grids and binary PGM
//! for 2D, JSON for decompositions. All floats are written with 17
//! significant digits so any reader reconstructs them bit-exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use homoflow_core::{GridDim, GridMeta, GridSignal, OrthoNsDecomposition};

use crate::CliError;

/// 17-significant-digit decimal, round-trip exact for f64.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn read_signal(path: &Path) -> Result<GridSignal, CliError> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    match ext.to_ascii_lowercase().as_str() {
        "pgm" => read_pgm(path),
        _ => read_csv_signal(path),
    }
}

/// CSV signal: one value per line is 1D; comma-separated rows are a 2D grid.
pub fn read_csv_signal(path: &Path) -> Result<GridSignal, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|tok| {
                tok.trim().parse::<f64>().map_err(|_| {
                    CliError::Usage(format!(
                        "{}:{}: not a number: {tok}",
                        path.display(),
                        lineno + 1
                    ))
                })
            })
            .collect::<Result<Vec<f64>, CliError>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Usage(format!("{}: empty signal", path.display())));
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(CliError::Usage(format!("{}: ragged rows", path.display())));
    }
    let signal = if cols == 1 {
        let flat: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        GridSignal::one_d(&flat, 1.0)
    } else {
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        let rows_n = flat.len() / cols;
        let meta = GridMeta { dim: GridDim::Two, rows: rows_n, cols, spacing: 1.0 };
        GridSignal::from_flat(meta, flat)
    };
    signal.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn write_csv_signal(path: &Path, signal: &GridSignal) -> Result<(), CliError> {
    let mut out = String::new();
    let values = signal.values();
    match signal.dim() {
        GridDim::One => {
            for v in signal.flat() {
                out.push_str(&fmt_float(*v));
                out.push('\n');
            }
        }
        GridDim::Two => {
            for row in values.rows() {
                let line: Vec<String> = row.iter().map(|&v| fmt_float(v)).collect();
                out.push_str(&line.join(","));
                out.push('\n');
            }
        }
    }
    fs::write(path, out)
        .map_err(|e| CliError::Other(format!("cannot write {}: {e}", path.display())))
}

/// Binary PGM (P5, 8- or 16-bit); values are normalized to [0, 1].
pub fn read_pgm(path: &Path) -> Result<GridSignal, CliError> {
    let data = fs::read(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let bad = |msg: &str| CliError::Usage(format!("{}: {msg}", path.display()));

    // header: magic, width, height, maxval as whitespace/comment-separated
    // tokens, then one whitespace byte before the raster
    let mut pos = 0usize;
    let mut tokens: Vec<String> = Vec::new();
    while tokens.len() < 4 && pos < data.len() {
        while pos < data.len() && (data[pos].is_ascii_whitespace()) {
            pos += 1;
        }
        if pos < data.len() && data[pos] == b'#' {
            while pos < data.len() && data[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < data.len() && !data[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start < pos {
            tokens.push(String::from_utf8_lossy(&data[start..pos]).into_owned());
        }
    }
    if tokens.len() < 4 || tokens[0] != "P5" {
        return Err(bad("not a binary P5 PGM"));
    }
    pos += 1; // single whitespace after maxval
    let width: usize = tokens[1].parse().map_err(|_| bad("bad width"))?;
    let height: usize = tokens[2].parse().map_err(|_| bad("bad height"))?;
    let maxval: u32 = tokens[3].parse().map_err(|_| bad("bad maxval"))?;
    if maxval == 0 || maxval > 65535 {
        return Err(bad("maxval out of range"));
    }
    let two_byte = maxval > 255;
    let expected = width * height * if two_byte { 2 } else { 1 };
    if data.len() < pos + expected {
        return Err(bad("truncated raster"));
    }
    let raster = &data[pos..pos + expected];
    let mut flat = Vec::with_capacity(width * height);
    if two_byte {
        for chunk in raster.chunks_exact(2) {
            let raw = u16::from_be_bytes([chunk[0], chunk[1]]) as f64;
            flat.push(raw / maxval as f64);
        }
    } else {
        for &b in raster {
            flat.push(b as f64 / maxval as f64);
        }
    }
    let meta = GridMeta { dim: GridDim::Two, rows: height, cols: width, spacing: 1.0 };
    GridSignal::from_flat(meta, flat).map_err(|e| bad(&e.to_string()))
}

/// 16-bit PGM plus a `<path>.scale.json` sidecar recording the affine map
/// value = min + raw/65535·(max−min), so no quantization range is lost.
pub fn write_pgm16_with_scale(path: &Path, signal: &GridSignal) -> Result<(), CliError> {
    if signal.dim() != GridDim::Two {
        return Err(CliError::Other("PGM output needs a 2D signal".into()));
    }
    let (rows, cols) = signal.values().dim();
    let min = signal.flat().iter().cloned().fold(f64::INFINITY, f64::min);
    let max = signal.flat().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if max > min { max - min } else { 1.0 };

    let mut buf = Vec::with_capacity(32 + rows * cols * 2);
    write!(buf, "P5\n{cols} {rows}\n65535\n")
        .map_err(|e| CliError::Other(e.to_string()))?;
    for &v in signal.flat() {
        let raw = (((v - min) / span) * 65535.0).round().clamp(0.0, 65535.0) as u16;
        buf.extend_from_slice(&raw.to_be_bytes());
    }
    fs::write(path, buf)
        .map_err(|e| CliError::Other(format!("cannot write {}: {e}", path.display())))?;

    let sidecar = path.with_extension("scale.json");
    let json = format!(
        "{{\"min\":{},\"max\":{}}}\n",
        fmt_float(min),
        fmt_float(min + span)
    );
    fs::write(&sidecar, json)
        .map_err(|e| CliError::Other(format!("cannot write {}: {e}", sidecar.display())))
}

/// Single column of floats, no header.
pub fn write_times_csv(path: &Path, times: &[f64]) -> Result<(), CliError> {
    let mut out = String::new();
    for t in times {
        out.push_str(&fmt_float(*t));
        out.push('\n');
    }
    fs::write(path, out)
        .map_err(|e| CliError::Other(format!("cannot write {}: {e}", path.display())))
}

pub fn read_times_csv(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.parse::<f64>()
                .map_err(|_| CliError::Usage(format!("{}: bad time {l}", path.display())))
        })
        .collect()
}

/// The serialized subset of a decomposition the `filter` command consumes.
pub struct StoredDecomposition {
    pub p: f64,
    pub delta: f64,
    pub modes: Vec<Vec<f64>>,
    pub lambdas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub ext_times: Vec<f64>,
    pub shape: Vec<usize>,
}

impl StoredDecomposition {
    pub fn meta(&self) -> Result<GridMeta, CliError> {
        match self.shape.as_slice() {
            [len] => Ok(GridMeta { dim: GridDim::One, rows: 1, cols: *len, spacing: 1.0 }),
            [rows, cols] => {
                Ok(GridMeta { dim: GridDim::Two, rows: *rows, cols: *cols, spacing: 1.0 })
            }
            other => Err(CliError::Usage(format!("bad shape {other:?} in decomposition"))),
        }
    }

    pub fn rank(&self) -> usize {
        self.alphas.len()
    }

    /// f_h = Σ φ_i α_i h_i from the stored (row-major) modes.
    pub fn filter(&self, h: &[f64]) -> Result<GridSignal, CliError> {
        let meta = self.meta()?;
        if h.len() != self.rank() {
            return Err(CliError::Usage(format!(
                "filter length {} does not match rank {}",
                h.len(),
                self.rank()
            )));
        }
        let mut flat = vec![0.0; meta.len()];
        for (i, mode) in self.modes.iter().enumerate() {
            let w = h[i] * self.alphas[i];
            if w == 0.0 {
                continue;
            }
            if mode.len() != flat.len() {
                return Err(CliError::Usage("mode length does not match shape".into()));
            }
            for (acc, &v) in flat.iter_mut().zip(mode) {
                *acc += w * v;
            }
        }
        GridSignal::from_flat(meta, flat).map_err(|e| CliError::Other(e.to_string()))
    }
}

fn json_float_array(values: &[f64]) -> String {
    let items: Vec<String> = values.iter().map(|&v| fmt_float(v)).collect();
    format!("[{}]", items.join(","))
}

/// Decomposition JSON: {p, delta, modes, lambdas, alphas, ext_times, shape},
/// modes row-major per mode, floats with 17 significant digits.
pub fn write_decomposition(path: &Path, dec: &OrthoNsDecomposition) -> Result<(), CliError> {
    let meta = dec.meta;
    let shape = match meta.dim {
        GridDim::One => format!("[{}]", meta.cols),
        GridDim::Two => format!("[{},{}]", meta.rows, meta.cols),
    };
    let modes: Vec<String> =
        (0..dec.rank()).map(|i| json_float_array(&dec.modes.column(i).to_vec())).collect();
    let json = format!(
        "{{\n\"p\":{},\n\"delta\":{},\n\"modes\":[{}],\n\"lambdas\":{},\n\"alphas\":{},\n\"ext_times\":{},\n\"shape\":{}\n}}\n",
        fmt_float(dec.p),
        fmt_float(dec.delta),
        modes.join(","),
        json_float_array(&dec.lambdas),
        json_float_array(&dec.alphas),
        json_float_array(&dec.ext_times),
        shape,
    );
    fs::write(path, json)
        .map_err(|e| CliError::Other(format!("cannot write {}: {e}", path.display())))
}

pub fn read_decomposition(path: &Path) -> Result<StoredDecomposition, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: invalid JSON: {e}", path.display())))?;
    let bad = |msg: &str| CliError::Usage(format!("{}: {msg}", path.display()));

    let f64_field = |name: &str| -> Result<f64, CliError> {
        value.get(name).and_then(|v| v.as_f64()).ok_or_else(|| bad(&format!("missing {name}")))
    };
    let vec_field = |name: &str| -> Result<Vec<f64>, CliError> {
        value
            .get(name)
            .and_then(|v| v.as_array())
            .ok_or_else(|| bad(&format!("missing {name}")))?
            .iter()
            .map(|x| x.as_f64().ok_or_else(|| bad(&format!("non-numeric entry in {name}"))))
            .collect()
    };

    let modes = value
        .get("modes")
        .and_then(|v| v.as_array())
        .ok_or_else(|| bad("missing modes"))?
        .iter()
        .map(|m| {
            m.as_array()
                .ok_or_else(|| bad("mode is not an array"))?
                .iter()
                .map(|x| x.as_f64().ok_or_else(|| bad("non-numeric mode entry")))
                .collect::<Result<Vec<f64>, CliError>>()
        })
        .collect::<Result<Vec<Vec<f64>>, CliError>>()?;
    let shape = value
        .get("shape")
        .and_then(|v| v.as_array())
        .ok_or_else(|| bad("missing shape"))?
        .iter()
        .map(|x| {
            x.as_u64().map(|u| u as usize).ok_or_else(|| bad("non-integer shape entry"))
        })
        .collect::<Result<Vec<usize>, CliError>>()?;

    Ok(StoredDecomposition {
        p: f64_field("p")?,
        delta: f64_field("delta")?,
        modes,
        lambdas: vec_field("lambdas")?,
        alphas: vec_field("alphas")?,
        ext_times: vec_field("ext_times")?,
        shape,
    })
}
