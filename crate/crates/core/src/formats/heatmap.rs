use std::path::Path;

use image::codecs::png::PngEncoder;
use image::{ImageEncoder, RgbImage};
use ndarray::Array2;

use super::{write_bytes, FormatError};

/// Zero is black; luminance grows with `|w|`. Positive weights run through
/// blue and teal to yellow, negative ones to red.
const POSITIVE: [[f64; 3]; 4] = [[0.0, 0.0, 0.0], [40.0, 60.0, 140.0], [40.0, 170.0, 160.0], [250.0, 230.0, 80.0]];
const NEGATIVE: [[f64; 3]; 2] = [[0.0, 0.0, 0.0], [255.0, 60.0, 40.0]];

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapOptions {
    /// Side of one cell in pixels.
    pub cell_size: u32,
    /// `|w|` that maps to the brightest color; 2 suits difference matrices.
    pub scale: f64,
    /// Row and column labels (SVG output only).
    pub labels: Option<Vec<String>>,
}

impl Default for HeatmapOptions {
    fn default() -> Self {
        Self {
            cell_size: 16,
            scale: 1.0,
            labels: None,
        }
    }
}

fn lerp(stops: &[[f64; 3]], t: f64) -> [u8; 3] {
    let segments = (stops.len() - 1) as f64;
    let x = t.clamp(0.0, 1.0) * segments;
    let k = (x.floor() as usize).min(stops.len() - 2);
    let f = x - k as f64;
    let (a, b) = (stops[k], stops[k + 1]);
    [0, 1, 2].map(|c| (a[c] + (b[c] - a[c]) * f).round() as u8)
}

pub fn cell_color(w: f64, scale: f64) -> [u8; 3] {
    let t = w.abs() / scale;
    if w < 0.0 {
        lerp(&NEGATIVE, t)
    } else {
        lerp(&POSITIVE, t)
    }
}

fn check(matrix: &Array2<f64>, options: &HeatmapOptions) -> Result<(), FormatError> {
    if !(options.scale > 0.0 && options.scale.is_finite()) {
        return Err(FormatError::invalid("heatmap scale", format!("must be positive, got {}", options.scale)));
    }
    if options.cell_size == 0 {
        return Err(FormatError::invalid("heatmap cell size", "must be at least 1"));
    }
    if let Some(((i, j), w)) = matrix.indexed_iter().find(|(_, w)| !(w.abs() <= 2.0)) {
        return Err(FormatError::invalid(format!("matrix[{i}][{j}]"), format!("{w} is outside [-2, 2]")));
    }
    Ok(())
}

pub fn heatmap_png(matrix: &Array2<f64>, options: &HeatmapOptions) -> Result<Vec<u8>, FormatError> {
    check(matrix, options)?;
    let (rows, cols) = matrix.dim();
    let cs = options.cell_size;
    let img = RgbImage::from_fn(cols as u32 * cs, rows as u32 * cs, |x, y| {
        image::Rgb(cell_color(matrix[[(y / cs) as usize, (x / cs) as usize]], options.scale))
    });
    let mut out = Vec::new();
    PngEncoder::new(&mut out)
        .write_image(img.as_raw(), img.width(), img.height(), image::ExtendedColorType::Rgb8)
        .map_err(|e| FormatError::Image(e.to_string()))?;
    Ok(out)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn heatmap_svg(matrix: &Array2<f64>, options: &HeatmapOptions) -> Result<String, FormatError> {
    check(matrix, options)?;
    let (rows, cols) = matrix.dim();
    let cs = options.cell_size as usize;
    let margin = match &options.labels {
        Some(l) => l.iter().map(|s| s.chars().count()).max().unwrap_or(0) * 7 + 8,
        None => 0,
    };
    let (w, h) = (margin + cols * cs, margin + rows * cs);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    );
    if let Some(labels) = &options.labels {
        for (i, l) in labels.iter().enumerate() {
            let c = margin + i * cs + cs / 2;
            let l = escape(l);
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\" dominant-baseline=\"middle\">{l}</text>\n",
                margin - 4,
                c
            ));
            svg.push_str(&format!(
                "<text transform=\"translate({c},{}) rotate(-90)\" font-size=\"11\" dominant-baseline=\"middle\">{l}</text>\n",
                margin - 4
            ));
        }
    }
    for ((i, j), v) in matrix.indexed_iter() {
        let [r, g, b] = cell_color(*v, options.scale);
        svg.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{cs}\" height=\"{cs}\" fill=\"#{r:02x}{g:02x}{b:02x}\"/>\n",
            margin + j * cs,
            margin + i * cs
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Writes PNG or SVG depending on the file extension.
pub fn render_heatmap(matrix: &Array2<f64>, path: &Path, options: &HeatmapOptions) -> Result<(), FormatError> {
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("svg") => write_bytes(path, heatmap_svg(matrix, options)?.as_bytes()),
        Some("png") => write_bytes(path, &heatmap_png(matrix, options)?),
        _ => Err(FormatError::invalid(path.display().to_string(), "heatmap path must end in .png or .svg")),
    }
}
