//! Synthetic corpora with known structure.
//!
//! Each grating class is a cosine at one DCT basis frequency, phase-locked
//! to the 8x8 block grid, so its energy sits in a single coefficient of
//! every block.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{DatasetError, Result};

/// Basis frequencies (cycles per 16 samples) of the four grating classes.
pub const GRATING_FREQUENCIES: [usize; 4] = [1, 3, 5, 7];

pub fn grating_class_name(frequency: usize) -> String {
    format!("Grating{frequency}(Synthetic)")
}

/// One gray grating image. Orientation, brightness, contrast and additive
/// noise are drawn from `rng`.
pub fn grating_image(frequency: usize, size: u32, rng: &mut impl Rng) -> image::RgbImage {
    let vertical = rng.random_bool(0.5);
    let base = rng.random_range(80.0..176.0);
    let amplitude = rng.random_range(30.0..60.0);
    let basis: Vec<f64> = (0..8)
        .map(|x| (PI * frequency as f64 * (2 * x + 1) as f64 / 16.0).cos())
        .collect();
    image::RgbImage::from_fn(size, size, |x, y| {
        let t = if vertical { y } else { x } as usize % 8;
        let v = base + amplitude * basis[t] + rng.random_range(-8.0..8.0);
        let v = v.round().clamp(0.0, 255.0) as u8;
        image::Rgb([v, v, v])
    })
}

/// Writes `per_class` PNG gratings of `size` x `size` for each frequency in
/// [`GRATING_FREQUENCIES`] under `root/<class name>/`.
pub fn write_grating_corpus(root: &Path, per_class: usize, size: u32, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for f in GRATING_FREQUENCIES {
        let dir = root.join(grating_class_name(f));
        std::fs::create_dir_all(&dir).map_err(DatasetError::io(&dir))?;
        for i in 0..per_class {
            let path = dir.join(format!("{i:05}.png"));
            grating_image(f, size, &mut rng)
                .save(&path)
                .map_err(|e| DatasetError::Io {
                    path: path.clone(),
                    source: std::io::Error::other(e),
                })?;
        }
    }
    Ok(())
}
