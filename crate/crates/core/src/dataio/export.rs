use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::{de::DeserializeOwned, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Min-max maps a grid to bytes; a constant grid becomes uniform 128.
pub fn to_gray(grid: &Grid) -> Vec<u8> {
    let (lo, hi) = grid.min_max();
    if !(hi > lo) {
        return vec![128; grid.as_slice().len()];
    }
    let scale = 255.0 / (hi - lo);
    grid.as_slice()
        .iter()
        .map(|&v| ((v - lo) * scale).round().clamp(0.0, 255.0) as u8)
        .collect()
}

fn write_png(
    path: &Path,
    width: usize,
    height: usize,
    color: png::ColorType,
    data: &[u8],
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut enc = png::Encoder::new(BufWriter::new(file), width as u32, height as u32);
    enc.set_color(color);
    enc.set_depth(png::BitDepth::Eight);
    let mut writer = enc.write_header()?;
    writer.write_image_data(data)?;
    writer.finish()?;
    Ok(())
}

/// Pixel buffer of a tiled montage: `per_row` tiles across, one-pixel black
/// gutters, each tile normalized on its own.
pub fn montage(grids: &[Grid], per_row: usize) -> Result<(usize, usize, Vec<u8>)> {
    let first = grids.first().ok_or(Error::Empty("image grid list"))?;
    let (th, tw) = first.shape();
    for g in grids {
        first.check_same_shape(g)?;
    }
    let per_row = per_row.clamp(1, grids.len());
    let tile_rows = grids.len().div_ceil(per_row);
    let width = per_row * (tw + 1) + 1;
    let height = tile_rows * (th + 1) + 1;
    let mut buf = vec![0u8; width * height];
    for (k, g) in grids.iter().enumerate() {
        let oy = (k / per_row) * (th + 1) + 1;
        let ox = (k % per_row) * (tw + 1) + 1;
        for (i, px) in to_gray(g).into_iter().enumerate() {
            buf[(oy + i / tw) * width + ox + i % tw] = px;
        }
    }
    Ok((width, height, buf))
}

pub fn write_image_grid(grids: &[Grid], per_row: usize, path: &Path) -> Result<()> {
    let (w, h, buf) = montage(grids, per_row)?;
    write_png(path, w, h, png::ColorType::Grayscale, &buf)
}

/// Header row plus one record per item.
pub fn write_csv<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::Empty("csv rows"));
    }
    let mut wtr = csv::Writer::from_path(path)?;
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut rdr = csv::Reader::from_path(path)?;
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub struct Series<'a> {
    pub points: &'a [(f64, f64)],
    pub rgb: [u8; 3],
}

const PLOT_W: usize = 640;
const PLOT_H: usize = 400;
const MARGIN: usize = 40;

/// Unlabelled line chart: axes, one polyline with square markers per series.
pub fn write_line_plot(series: &[Series<'_>], path: &Path) -> Result<()> {
    let all = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    let mut any = false;
    for &(x, y) in all {
        any = true;
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !any {
        return Err(Error::Empty("plot series"));
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let mut img = vec![255u8; PLOT_W * PLOT_H * 3];
    let mut put = |x: i64, y: i64, c: [u8; 3]| {
        if x >= 0 && y >= 0 && (x as usize) < PLOT_W && (y as usize) < PLOT_H {
            let i = (y as usize * PLOT_W + x as usize) * 3;
            img[i..i + 3].copy_from_slice(&c);
        }
    };
    let (left, right) = (MARGIN as i64, (PLOT_W - MARGIN) as i64);
    let (top, bottom) = (MARGIN as i64, (PLOT_H - MARGIN) as i64);
    for x in left..=right {
        put(x, bottom, [0, 0, 0]);
    }
    for y in top..=bottom {
        put(left, y, [0, 0, 0]);
    }
    let to_px = |(x, y): (f64, f64)| {
        let px = left as f64 + (x - x0) / (x1 - x0) * (right - left) as f64;
        let py = bottom as f64 - (y - y0) / (y1 - y0) * (bottom - top) as f64;
        (px.round() as i64, py.round() as i64)
    };
    for s in series {
        let pts: Vec<_> = s.points.iter().map(|&p| to_px(p)).collect();
        for pair in pts.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let steps = (b.0 - a.0).abs().max((b.1 - a.1).abs()).max(1);
            for k in 0..=steps {
                let t = k as f64 / steps as f64;
                let x = a.0 as f64 + t * (b.0 - a.0) as f64;
                let y = a.1 as f64 + t * (b.1 - a.1) as f64;
                put(x.round() as i64, y.round() as i64, s.rgb);
            }
        }
        for &(x, y) in &pts {
            for dy in -2..=2 {
                for dx in -2..=2 {
                    put(x + dx, y + dy, s.rgb);
                }
            }
        }
    }
    write_png(path, PLOT_W, PLOT_H, png::ColorType::Rgb, &img)
}
