//! Raster rendering of a problem and an optional path (PNG, 8-bit RGB).

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::geometry::{ConvexPolygon, PathCandidate};
use crate::number;
use crate::problems::Problem;

pub type Rgb = [u8; 3];

pub const BACKGROUND: Rgb = [0xFF, 0xFF, 0xFF];
pub const INITIAL: Rgb = [0x00, 0x00, 0xFF];
pub const GOAL: Rgb = [0x00, 0xA0, 0x00];
pub const OBSTACLE: Rgb = [0xFF, 0x00, 0x00];
pub const PATH: Rgb = [0x00, 0x00, 0x00];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RenderSettings {
    pub width: u32,
    pub height: u32,
    pub line_width: u32,
    pub point_radius: u32,
}

impl Default for RenderSettings {
    fn default() -> Self {
        Self {
            width: 512,
            height: 512,
            line_width: 2,
            point_radius: 4,
        }
    }
}

/// PNG bytes of a rendering. Transcripts keep only the size and digest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageHint {
    #[serde(skip)]
    pub pixels: Vec<u8>,
    pub width: u32,
    pub height: u32,
    #[serde(default)]
    pub sha256: String,
}

impl ImageHint {
    fn new(pixels: Vec<u8>, width: u32, height: u32) -> Self {
        let sha256 = Sha256::digest(&pixels)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        Self { pixels, width, height, sha256 }
    }
}

/// Uniform scale plus y-flip from workspace coordinates to pixel space,
/// centered when the aspect ratios differ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Viewport {
    min_x: f64,
    min_y: f64,
    scale: f64,
    offset_x: f64,
    offset_y: f64,
    height: f64,
}

impl Viewport {
    pub fn new(problem: &Problem, settings: &RenderSettings) -> Self {
        let (lo, hi) = problem.workspace.bounds();
        let (min_x, min_y) = lo.to_f64();
        let (max_x, max_y) = hi.to_f64();
        let (w, h) = (settings.width as f64, settings.height as f64);
        let scale = (w / (max_x - min_x)).min(h / (max_y - min_y));
        Self {
            min_x,
            min_y,
            scale,
            offset_x: (w - (max_x - min_x) * scale) / 2.0,
            offset_y: (h - (max_y - min_y) * scale) / 2.0,
            height: h,
        }
    }

    /// Continuous pixel coordinates (pixel `(i, j)` spans `[i, i+1) × [j, j+1)`).
    pub fn to_pixel(&self, x: f64, y: f64) -> (f64, f64) {
        let px = self.offset_x + (x - self.min_x) * self.scale;
        let py = self.height - (self.offset_y + (y - self.min_y) * self.scale);
        (px, py)
    }

    pub fn to_world(&self, px: f64, py: f64) -> (f64, f64) {
        let x = self.min_x + (px - self.offset_x) / self.scale;
        let y = self.min_y + (self.height - py - self.offset_y) / self.scale;
        (x, y)
    }
}

fn polygon_f64(poly: &ConvexPolygon) -> Vec<(f64, f64)> {
    poly.vertices().iter().map(|p| p.to_f64()).collect()
}

fn inside(poly: &[(f64, f64)], x: f64, y: f64) -> bool {
    let n = poly.len();
    (0..n).all(|i| {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        (b.0 - a.0) * (y - a.1) - (b.1 - a.1) * (x - a.0) >= 0.0
    })
}

struct Canvas {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl Canvas {
    fn new(width: u32, height: u32) -> Self {
        let mut data = Vec::with_capacity((width * height * 3) as usize);
        for _ in 0..width * height {
            data.extend_from_slice(&BACKGROUND);
        }
        Self { width, height, data }
    }

    fn set(&mut self, x: i64, y: i64, color: Rgb) {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            return;
        }
        let i = ((y as u32 * self.width + x as u32) * 3) as usize;
        self.data[i..i + 3].copy_from_slice(&color);
    }

    fn fill_polygon(&mut self, view: &Viewport, poly: &ConvexPolygon, color: Rgb) {
        let verts = polygon_f64(poly);
        for j in 0..self.height {
            for i in 0..self.width {
                let (x, y) = view.to_world(i as f64 + 0.5, j as f64 + 0.5);
                if inside(&verts, x, y) {
                    self.set(i as i64, j as i64, color);
                }
            }
        }
    }

    fn square(&mut self, cx: i64, cy: i64, size: u32, color: Rgb) {
        let lo = -((size as i64 - 1) / 2);
        for dy in lo..lo + size as i64 {
            for dx in lo..lo + size as i64 {
                self.set(cx + dx, cy + dy, color);
            }
        }
    }

    fn line(&mut self, from: (i64, i64), to: (i64, i64), width: u32, color: Rgb) {
        // Bresenham.
        let (mut x0, mut y0) = from;
        let (x1, y1) = to;
        let dx = (x1 - x0).abs();
        let dy = -(y1 - y0).abs();
        let sx = if x0 < x1 { 1 } else { -1 };
        let sy = if y0 < y1 { 1 } else { -1 };
        let mut err = dx + dy;
        loop {
            self.square(x0, y0, width.max(1), color);
            if x0 == x1 && y0 == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x0 += sx;
            }
            if e2 <= dx {
                err += dx;
                y0 += sy;
            }
        }
    }

    fn disc(&mut self, cx: i64, cy: i64, radius: u32, color: Rgb) {
        let r = radius as i64;
        for dy in -r..=r {
            for dx in -r..=r {
                if dx * dx + dy * dy <= r * r {
                    self.set(cx + dx, cy + dy, color);
                }
            }
        }
    }

    fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        {
            let mut encoder = png::Encoder::new(&mut out, self.width, self.height);
            encoder.set_color(png::ColorType::Rgb);
            encoder.set_depth(png::BitDepth::Eight);
            encoder.set_compression(png::Compression::Balanced);
            let mut writer = encoder.write_header().expect("in-memory PNG header");
            writer.write_image_data(&self.data).expect("in-memory PNG data");
        }
        out
    }
}

/// Workspace white, obstacles red, initial set blue, goal green, and the
/// path as a black polyline with waypoint dots.
pub fn render_image(problem: &Problem, path: Option<&PathCandidate>, settings: &RenderSettings) -> ImageHint {
    let view = Viewport::new(problem, settings);
    let mut canvas = Canvas::new(settings.width, settings.height);
    for o in &problem.obstacles {
        canvas.fill_polygon(&view, o, OBSTACLE);
    }
    canvas.fill_polygon(&view, &problem.initial, INITIAL);
    canvas.fill_polygon(&view, &problem.goal, GOAL);
    if let Some(path) = path {
        let pixels: Vec<(i64, i64)> = path
            .waypoints()
            .iter()
            .map(|p| {
                let (px, py) = view.to_pixel(number::to_f64(&p.x), number::to_f64(&p.y));
                (px.floor() as i64, py.floor() as i64)
            })
            .collect();
        for w in pixels.windows(2) {
            canvas.line(w[0], w[1], settings.line_width, PATH);
        }
        for &(x, y) in &pixels {
            canvas.disc(x, y, settings.point_radius, PATH);
        }
    }
    ImageHint::new(canvas.encode(), settings.width, settings.height)
}

/// Decodes an RGB PNG produced by [`render_image`] into raw pixel rows.
pub fn decode_rgb(png_bytes: &[u8]) -> Option<(u32, u32, Vec<u8>)> {
    let decoder = png::Decoder::new(std::io::Cursor::new(png_bytes));
    let mut reader = decoder.read_info().ok()?;
    let mut buf = vec![0; reader.output_buffer_size()?];
    let info = reader.next_frame(&mut buf).ok()?;
    if info.color_type != png::ColorType::Rgb || info.bit_depth != png::BitDepth::Eight {
        return None;
    }
    buf.truncate(info.buffer_size());
    Some((info.width, info.height, buf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ConvexPolygon, Point};
    use crate::number::int;
    use std::collections::BTreeSet;

    fn rect(x0: i64, y0: i64, x1: i64, y1: i64) -> ConvexPolygon {
        ConvexPolygon::rectangle(int(x0), int(y0), int(x1), int(y1)).unwrap()
    }

    fn colors(png: &[u8]) -> BTreeSet<Rgb> {
        let (_, _, data) = decode_rgb(png).unwrap();
        data.chunks(3).map(|c| [c[0], c[1], c[2]]).collect()
    }

    #[test]
    fn obstacle_free_has_three_colors() {
        let p = Problem::new("t", rect(0, 0, 10, 10), rect(0, 0, 1, 1), rect(9, 9, 10, 10), vec![], vec![]).unwrap();
        let img = render_image(&p, None, &RenderSettings::default());
        assert_eq!(colors(&img.pixels), BTreeSet::from([BACKGROUND, INITIAL, GOAL]));
    }

    #[test]
    fn path_is_drawn_black() {
        let p = Problem::new("t", rect(0, 0, 10, 10), rect(0, 0, 1, 1), rect(9, 9, 10, 10), vec![rect(4, 4, 6, 6)], vec![]).unwrap();
        let path = PathCandidate::new(vec![Point::from_ints(0, 5), Point::from_ints(9, 5)]);
        let img = render_image(&p, Some(&path), &RenderSettings::default());
        let set = colors(&img.pixels);
        assert!(set.contains(&PATH) && set.contains(&OBSTACLE));
        assert_eq!(img.sha256.len(), 64);
    }

    #[test]
    fn viewport_round_trips_and_flips() {
        let p = Problem::new("t", rect(0, 0, 20, 10), rect(0, 0, 1, 1), rect(9, 9, 10, 10), vec![], vec![]).unwrap();
        let view = Viewport::new(&p, &RenderSettings::default());
        let (px, py) = view.to_pixel(0.0, 0.0);
        assert_eq!((px, py), (0.0, 384.0));
        let (x, y) = view.to_world(px, py);
        assert!((x - 0.0).abs() < 1e-12 && (y - 0.0).abs() < 1e-12);
        assert!(view.to_pixel(0.0, 10.0).1 < py);
    }
}
