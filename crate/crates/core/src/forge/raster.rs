use std::path::Path;

use image::codecs::png::PngEncoder;
use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder, RgbImage};

use crate::error::{Error, Result};

/// 8-bit RGB image stored row-major, three bytes per pixel.
#[derive(Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl std::fmt::Debug for RasterImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RasterImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl RasterImage {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        let expected = 3 * width as usize * height as usize;
        if pixels.len() != expected {
            return Err(Error::invalid(format!(
                "pixel buffer has {} bytes, expected {expected}",
                pixels.len()
            )));
        }
        Ok(RasterImage {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Result<Self> {
        let n = width as usize * height as usize;
        Self::new(width, height, rgb.repeat(n))
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    fn offset(&self, x: u32, y: u32) -> usize {
        3 * (y as usize * self.width as usize + x as usize)
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let i = self.offset(x, y);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn put(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = self.offset(x, y);
        self.pixels[i..i + 3].copy_from_slice(&rgb);
    }

    /// Copies the sub-rectangle `[x0, x0 + w) x [y0, y0 + h)`, clipped to the
    /// image. Returns `None` when the clipped region is empty.
    pub fn crop(&self, x0: u32, y0: u32, w: u32, h: u32) -> Option<RasterImage> {
        let x1 = (x0.saturating_add(w)).min(self.width);
        let y1 = (y0.saturating_add(h)).min(self.height);
        if x0 >= x1 || y0 >= y1 {
            return None;
        }
        let mut pixels = Vec::with_capacity(3 * ((x1 - x0) * (y1 - y0)) as usize);
        for y in y0..y1 {
            let a = self.offset(x0, y);
            let b = self.offset(x1 - 1, y) + 3;
            pixels.extend_from_slice(&self.pixels[a..b]);
        }
        Some(RasterImage {
            width: x1 - x0,
            height: y1 - y0,
            pixels,
        })
    }

    /// Reads a PNG or PPM file, converting to 8-bit RGB.
    pub fn load(path: &Path) -> Result<Self> {
        let img = image::open(path).map_err(|e| Error::Image {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Ok(Self::from(img.to_rgb8()))
    }

    /// Encodes the image in the format named by `path`'s extension
    /// (`.png`, or `.ppm` as binary P6).
    pub fn encode_for(&self, path: &Path) -> Result<Vec<u8>> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        let img_err = |message: String| Error::Image {
            path: path.to_path_buf(),
            message,
        };
        let mut buf = Vec::new();
        match ext.as_deref() {
            Some("ppm") => PnmEncoder::new(&mut buf)
                .with_subtype(PnmSubtype::Pixmap(SampleEncoding::Binary))
                .write_image(&self.pixels, self.width, self.height, ExtendedColorType::Rgb8),
            Some("png") => PngEncoder::new(&mut buf).write_image(
                &self.pixels,
                self.width,
                self.height,
                ExtendedColorType::Rgb8,
            ),
            _ => return Err(img_err("unsupported image extension (use .png or .ppm)".into())),
        }
        .map_err(|e| img_err(e.to_string()))?;
        Ok(buf)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes = self.encode_for(path)?;
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    /// Per-channel mean over all pixels.
    pub fn channel_means(&self) -> [f64; 3] {
        let mut sums = [0u64; 3];
        for px in self.pixels.chunks_exact(3) {
            for c in 0..3 {
                sums[c] += u64::from(px[c]);
            }
        }
        let n = (self.width as u64 * self.height as u64) as f64;
        sums.map(|s| s as f64 / n)
    }
}

impl From<RgbImage> for RasterImage {
    fn from(img: RgbImage) -> Self {
        let (width, height) = img.dimensions();
        RasterImage {
            width,
            height,
            pixels: img.into_raw(),
        }
    }
}

impl From<RasterImage> for RgbImage {
    fn from(img: RasterImage) -> Self {
        RgbImage::from_raw(img.width, img.height, img.pixels).expect("buffer length invariant")
    }
}

/// Rounds and clamps a channel value to 8 bits.
pub(crate) fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}
