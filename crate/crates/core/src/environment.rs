//! The tiled arena: generation, point queries, and noisy ground sensing.

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::Error;

/// Tile color; doubles as a robot opinion about the dominant color.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Color {
    Black,
    White,
}

impl Color {
    pub fn flipped(self) -> Color {
        match self {
            Color::Black => Color::White,
            Color::White => Color::Black,
        }
    }

    /// Wire/trace encoding: black = 0, white = 1.
    pub fn as_index(self) -> usize {
        match self {
            Color::Black => 0,
            Color::White => 1,
        }
    }
}

/// Immutable grid of floor tiles with an exact black-tile count.
#[derive(Debug, Clone)]
pub struct TileGrid {
    width: u32,
    height: u32,
    tile_size: f64,
    colors: Vec<Color>,
}

impl TileGrid {
    /// Generates a square arena of `arena_side / tile_size` tiles per edge,
    /// with exactly `round(black_fraction * total)` black tiles placed by a
    /// uniform random permutation of the tile indices.
    pub fn generate(
        arena_side: f64,
        tile_size: f64,
        black_fraction: f64,
        rng: &mut impl Rng,
    ) -> Result<TileGrid, Error> {
        let valid = |v: f64| v.is_finite() && v > 0.0;
        if !valid(tile_size) || !valid(arena_side) {
            return Err(Error::config("tile_size_m", "arena and tile size must be positive"));
        }
        let per_edge = (arena_side / tile_size).round();
        if (per_edge * tile_size - arena_side).abs() > 1e-9 * arena_side.max(1.0) {
            return Err(Error::config(
                "arena_side_m",
                format!("{arena_side} is not an integer multiple of tile size {tile_size}"),
            ));
        }
        if !(0.0..=1.0).contains(&black_fraction) {
            return Err(Error::config(
                "black_fraction",
                format!("{black_fraction} outside [0, 1]"),
            ));
        }
        let per_edge = per_edge as u32;
        let total = (per_edge as usize) * (per_edge as usize);
        let black = (black_fraction * total as f64).round() as usize;
        let mut colors = vec![Color::White; total];
        colors[..black].fill(Color::Black);
        colors.shuffle(rng);
        Ok(TileGrid {
            width: per_edge,
            height: per_edge,
            tile_size,
            colors,
        })
    }

    pub fn width_tiles(&self) -> u32 {
        self.width
    }

    pub fn height_tiles(&self) -> u32 {
        self.height
    }

    pub fn tile_size(&self) -> f64 {
        self.tile_size
    }

    pub fn arena_side(&self) -> f64 {
        self.width as f64 * self.tile_size
    }

    pub fn black_count(&self) -> usize {
        self.colors.iter().filter(|c| **c == Color::Black).count()
    }

    pub fn total_tiles(&self) -> usize {
        self.colors.len()
    }

    /// The true dominant color, or `None` on an exact tie.
    pub fn dominant_color(&self) -> Option<Color> {
        let black = self.black_count();
        let white = self.total_tiles() - black;
        match black.cmp(&white) {
            std::cmp::Ordering::Greater => Some(Color::Black),
            std::cmp::Ordering::Less => Some(Color::White),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn color_at_index(&self, ix: u32, iy: u32) -> Color {
        self.colors[(iy * self.width + ix) as usize]
    }

    /// Tile index containing a coordinate, under half-open tile intervals
    /// `[k*tile_size, (k+1)*tile_size)`.
    fn axis_index(&self, v: f64, extent: u32) -> Result<u32, Error> {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::Query(format!("coordinate {v} out of bounds")));
        }
        let mut k = (v / self.tile_size).floor();
        // Guard against float rounding at tile edges.
        if v < k * self.tile_size {
            k -= 1.0;
        } else if v >= (k + 1.0) * self.tile_size {
            k += 1.0;
        }
        let k = k as i64;
        if k < 0 || k >= extent as i64 {
            return Err(Error::Query(format!("coordinate {v} out of bounds")));
        }
        Ok(k as u32)
    }

    /// Color of the tile containing `(x, y)`.
    pub fn color_at(&self, x: f64, y: f64) -> Result<Color, Error> {
        let ix = self.axis_index(x, self.width)?;
        let iy = self.axis_index(y, self.height)?;
        Ok(self.color_at_index(ix, iy))
    }

    /// Ground sensor reading at `(x, y)`: the true color, flipped with
    /// probability `noise_p`.
    pub fn sense(
        &self,
        x: f64,
        y: f64,
        noise_p: f64,
        rng: &mut impl Rng,
    ) -> Result<Color, Error> {
        let true_color = self.color_at(x, y)?;
        if noise_p > 0.0 && rng.gen::<f64>() < noise_p {
            Ok(true_color.flipped())
        } else {
            Ok(true_color)
        }
    }

    /// Writes the plain-text form: header `W H tile_size`, then `H` rows of
    /// `W` characters in `{B, W}`. Row `r` covers y in `[r*tile_size, (r+1)*tile_size)`.
    pub fn write_text(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{} {} {}", self.width, self.height, self.tile_size)?;
        for iy in 0..self.height {
            let row: String = (0..self.width)
                .map(|ix| match self.color_at_index(ix, iy) {
                    Color::Black => 'B',
                    Color::White => 'W',
                })
                .collect();
            writeln!(w, "{row}")?;
        }
        Ok(())
    }

    /// Parses the format produced by [`TileGrid::write_text`].
    pub fn read_text(r: impl BufRead) -> Result<TileGrid, Error> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty grid file".into()))??;
        let mut parts = header.split_whitespace();
        let mut field = |name: &str| {
            parts
                .next()
                .ok_or_else(|| Error::Parse(format!("grid header missing {name}")))
        };
        let width: u32 = field("width")?.parse().map_err(|e| Error::Parse(format!("width: {e}")))?;
        let height: u32 = field("height")?.parse().map_err(|e| Error::Parse(format!("height: {e}")))?;
        let tile_size: f64 = field("tile size")?.parse().map_err(|e| Error::Parse(format!("tile size: {e}")))?;
        let mut colors = Vec::with_capacity((width * height) as usize);
        for _ in 0..height {
            let row = lines
                .next()
                .ok_or_else(|| Error::Parse("grid file truncated".into()))??;
            if row.len() != width as usize {
                return Err(Error::Parse(format!(
                    "grid row has {} tiles, expected {width}",
                    row.len()
                )));
            }
            for ch in row.chars() {
                colors.push(match ch {
                    'B' => Color::Black,
                    'W' => Color::White,
                    other => return Err(Error::Parse(format!("bad tile char {other:?}"))),
                });
            }
        }
        Ok(TileGrid {
            width,
            height,
            tile_size,
            colors,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{global_stream, StreamKind};

    fn grid(frac: f64, seed: u64) -> TileGrid {
        let mut rng = global_stream(seed, StreamKind::EnvLayout);
        TileGrid::generate(8.0, 0.2, frac, &mut rng).unwrap()
    }

    #[test]
    fn exact_black_count_at_paper_fraction() {
        let g = grid(0.34, 1);
        assert_eq!(g.width_tiles(), 40);
        assert_eq!(g.height_tiles(), 40);
        assert_eq!(g.total_tiles(), 1600);
        assert_eq!(g.black_count(), 544);
        assert_eq!(g.dominant_color(), Some(Color::White));
    }

    #[test]
    fn degenerate_fractions() {
        assert_eq!(grid(0.0, 2).black_count(), 0);
        let half = grid(0.5, 3);
        assert_eq!(half.black_count(), 800);
        assert_eq!(half.dominant_color(), None);
        assert_eq!(grid(1.0, 4).black_count(), 1600);
    }

    #[test]
    fn generation_is_deterministic() {
        let a = grid(0.4, 9);
        let b = grid(0.4, 9);
        assert_eq!(a.colors, b.colors);
        let c = grid(0.4, 10);
        assert_ne!(a.colors, c.colors);
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut rng = global_stream(0, StreamKind::EnvLayout);
        assert!(TileGrid::generate(8.1, 0.2, 0.3, &mut rng).is_err());
        assert!(TileGrid::generate(8.0, 0.2, 1.2, &mut rng).is_err());
        assert!(TileGrid::generate(8.0, 0.2, -0.1, &mut rng).is_err());
    }

    #[test]
    fn half_open_tile_boundaries() {
        let g = grid(0.3, 5);
        // (0.2, 0.0) belongs to tile (1, 0), not (0, 0).
        assert_eq!(g.color_at(0.2, 0.0).unwrap(), g.color_at_index(1, 0));
        assert_eq!(g.color_at(0.1, 0.1).unwrap(), g.color_at_index(0, 0));
        // Upper edge is exclusive.
        assert!(g.color_at(8.0, 4.0).is_err());
        assert!(g.color_at(4.0, -0.001).is_err());
        assert_eq!(g.color_at(7.999, 7.999).unwrap(), g.color_at_index(39, 39));
    }

    #[test]
    fn sense_extremes() {
        let g = grid(0.4, 6);
        let mut rng = global_stream(6, StreamKind::GroundNoise);
        for _ in 0..50 {
            let x = rng.gen::<f64>() * 7.9;
            let y = rng.gen::<f64>() * 7.9;
            let truth = g.color_at(x, y).unwrap();
            assert_eq!(g.sense(x, y, 0.0, &mut rng).unwrap(), truth);
            assert_eq!(g.sense(x, y, 1.0, &mut rng).unwrap(), truth.flipped());
        }
    }

    #[test]
    fn sense_noise_rate_matches_binomial() {
        let g = grid(1.0, 7); // all black
        let mut rng = global_stream(7, StreamKind::GroundNoise);
        let n = 100_000;
        let mut white = 0;
        for _ in 0..n {
            if g.sense(1.0, 1.0, 0.1, &mut rng).unwrap() == Color::White {
                white += 1;
            }
        }
        let frac = white as f64 / n as f64;
        assert!((frac - 0.1).abs() < 0.01, "flip fraction {frac}");
    }

    #[test]
    fn text_round_trip() {
        let g = grid(0.37, 8);
        let mut buf = Vec::new();
        g.write_text(&mut buf).unwrap();
        let back = TileGrid::read_text(buf.as_slice()).unwrap();
        assert_eq!(back.colors, g.colors);
        assert_eq!(back.tile_size, g.tile_size);
    }
}
