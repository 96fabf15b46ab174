use std::io::Write;
use std::path::Path;

use crate::element::GllBasis;
use crate::geometry::Lattice;
use crate::solve::Field;
use crate::Result;

/// One sampled point of the export grid.
struct Sample {
    x: [f64; 2],
    u: [f64; 2],
    inside: bool,
}

fn sample_grid(field: &Field, lattice: &Lattice, resolution: usize) -> Vec<Vec<Sample>> {
    let basis = GllBasis::new(field.p);
    lattice
        .cells
        .iter()
        .enumerate()
        .map(|(i, cell)| {
            let mut out = Vec::with_capacity(resolution * resolution);
            for b in 0..resolution {
                for a in 0..resolution {
                    let xi1 = (a as f64 + 0.5) / resolution as f64;
                    let xi2 = (b as f64 + 0.5) / resolution as f64;
                    out.push(Sample {
                        x: cell.map.position(xi1, xi2),
                        u: field.eval(&basis, i, xi1, xi2),
                        inside: cell.phi(xi1, xi2) < 0.0,
                    });
                }
            }
            out
        })
        .collect()
}

/// Writes the sampled displacement field of every cell:
/// a point-cloud CSV, a legacy-VTK unstructured grid, and a magnitude
/// raster image. Returns the written paths.
pub fn export_fields(
    field: &Field,
    lattice: &Lattice,
    resolution: usize,
    dir: &Path,
    stem: &str,
) -> Result<Vec<std::path::PathBuf>> {
    assert!(resolution >= 2, "need at least two samples per cell per direction");
    std::fs::create_dir_all(dir)?;
    let samples = sample_grid(field, lattice, resolution);
    let csv_path = dir.join(format!("{stem}.csv"));
    let vtk_path = dir.join(format!("{stem}.vtk"));
    let png_path = dir.join(format!("{stem}.png"));

    // point cloud
    {
        let mut w = std::io::BufWriter::new(std::fs::File::create(&csv_path)?);
        writeln!(w, "x1,x2,u1,u2,umag,inside")?;
        for cell in &samples {
            for s in cell {
                let mag = s.u[0].hypot(s.u[1]);
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    s.x[0], s.x[1], s.u[0], s.u[1], mag, u8::from(s.inside)
                )?;
            }
        }
    }

    // legacy VTK: per-cell structured sub-grids of quads
    {
        let mut w = std::io::BufWriter::new(std::fs::File::create(&vtk_path)?);
        let n_pts: usize = samples.iter().map(|c| c.len()).sum();
        let quads_per_cell = (resolution - 1) * (resolution - 1);
        let n_quads = lattice.n_cells() * quads_per_cell;
        writeln!(w, "# vtk DataFile Version 3.0")?;
        writeln!(w, "lattice displacement field")?;
        writeln!(w, "ASCII")?;
        writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
        writeln!(w, "POINTS {n_pts} double")?;
        for cell in &samples {
            for s in cell {
                writeln!(w, "{} {} 0.0", s.x[0], s.x[1])?;
            }
        }
        writeln!(w, "CELLS {n_quads} {}", n_quads * 5)?;
        for (i, _) in samples.iter().enumerate() {
            let base = i * resolution * resolution;
            for b in 0..resolution - 1 {
                for a in 0..resolution - 1 {
                    let p0 = base + b * resolution + a;
                    writeln!(w, "4 {} {} {} {}", p0, p0 + 1, p0 + resolution + 1, p0 + resolution)?;
                }
            }
        }
        writeln!(w, "CELL_TYPES {n_quads}")?;
        for _ in 0..n_quads {
            writeln!(w, "9")?;
        }
        writeln!(w, "POINT_DATA {n_pts}")?;
        writeln!(w, "VECTORS displacement double")?;
        for cell in &samples {
            for s in cell {
                writeln!(w, "{} {} 0.0", s.u[0], s.u[1])?;
            }
        }
        writeln!(w, "SCALARS inside int 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for cell in &samples {
            for s in cell {
                writeln!(w, "{}", u8::from(s.inside))?;
            }
        }
    }

    render_magnitude(&samples, &png_path)?;
    Ok(vec![csv_path, vtk_path, png_path])
}

/// Perceptually ordered five-stop colormap.
fn colormap(t: f64) -> [u8; 3] {
    const STOPS: [[f64; 3]; 5] = [
        [0.267, 0.005, 0.329],
        [0.229, 0.322, 0.546],
        [0.128, 0.567, 0.551],
        [0.369, 0.789, 0.383],
        [0.993, 0.906, 0.144],
    ];
    let t = t.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let i = (t.floor() as usize).min(STOPS.len() - 2);
    let f = t - i as f64;
    std::array::from_fn(|c| {
        (255.0 * (STOPS[i][c] + f * (STOPS[i + 1][c] - STOPS[i][c]))).round() as u8
    })
}

fn render_magnitude(samples: &[Vec<Sample>], path: &Path) -> Result<()> {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    let mut max_mag = 0.0f64;
    let mut n_inside = 0usize;
    for cell in samples {
        for s in cell.iter().filter(|s| s.inside) {
            for d in 0..2 {
                lo[d] = lo[d].min(s.x[d]);
                hi[d] = hi[d].max(s.x[d]);
            }
            max_mag = max_mag.max(s.u[0].hypot(s.u[1]));
            n_inside += 1;
        }
    }
    if n_inside == 0 {
        lo = [0.0, 0.0];
        hi = [1.0, 1.0];
    }
    let span = [(hi[0] - lo[0]).max(1e-12), (hi[1] - lo[1]).max(1e-12)];
    let width: u32 = 900;
    let height: u32 = ((width as f64) * span[1] / span[0]).clamp(80.0, 1600.0) as u32;
    // splat radius tied to the sample spacing so the raster closes up
    let total: usize = samples.iter().map(|c| c.len()).sum();
    let spacing = (span[0] * span[1] / total.max(1) as f64).sqrt();
    let r = ((spacing / span[0] * width as f64).ceil() as i64).max(1);

    let bg = [30u8, 30, 34];
    let mut img = image::RgbImage::from_pixel(width, height, image::Rgb(bg));
    for cell in samples {
        for s in cell.iter().filter(|s| s.inside) {
            let px = ((s.x[0] - lo[0]) / span[0] * (width - 1) as f64).round() as i64;
            // image rows grow downward
            let py = ((hi[1] - s.x[1]) / span[1] * (height - 1) as f64).round() as i64;
            let mag = s.u[0].hypot(s.u[1]);
            let c = colormap(if max_mag > 0.0 { mag / max_mag } else { 0.0 });
            for dy in -r..=r {
                for dx in -r..=r {
                    if dx * dx + dy * dy > r * r {
                        continue;
                    }
                    let (x, y) = (px + dx, py + dy);
                    if x >= 0 && y >= 0 && (x as u32) < width && (y as u32) < height {
                        img.put_pixel(x as u32, y as u32, image::Rgb(c));
                    }
                }
            }
        }
    }
    img.save(path).map_err(|e| crate::Error::Config(format!("image write failed: {e}")))?;
    Ok(())
}

/// Write rows of serializable records as a CSV table with full-precision
/// floats.
pub fn write_csv<T: serde::Serialize>(rows: &[T], path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    for (i, row) in rows.iter().enumerate() {
        let value = serde_json::to_value(row)?;
        let obj = value
            .as_object()
            .ok_or_else(|| crate::Error::Config("csv rows must be flat records".into()))?;
        if i == 0 {
            let header: Vec<&str> = obj.keys().map(|k| k.as_str()).collect();
            writeln!(w, "{}", header.join(","))?;
        }
        let cells: Vec<String> = obj
            .values()
            .map(|v| match v {
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            })
            .collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}
