use image::{DynamicImage, ImageBuffer, Luma, Rgb};
use std::path::Path;

use crate::config::{BitDepth, ColorPolicy};
use crate::error::{Error, Result};
use crate::field::ImageField;

/// Rec. 601 luma weights applied to linear `[0, 1]` channel values.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// One or more single-channel fields decoded from a raster.
///
/// Under [`ColorPolicy::Luma`] there is always exactly one channel. Under
/// [`ColorPolicy::PerChannel`] grayscale sources give one channel and RGB
/// sources give three.
#[derive(Debug, Clone, PartialEq)]
pub struct Channels(Vec<ImageField>);

impl Channels {
    pub fn gray(field: ImageField) -> Self {
        Self(vec![field])
    }

    pub fn rgb(r: ImageField, g: ImageField, b: ImageField) -> Result<Self> {
        crate::field::ensure_same_dims(r.dims(), g.dims())?;
        crate::field::ensure_same_dims(r.dims(), b.dims())?;
        Ok(Self(vec![r, g, b]))
    }

    pub fn fields(&self) -> &[ImageField] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0[0].dims()
    }

    pub fn into_fields(self) -> Vec<ImageField> {
        self.0
    }

    /// All samples from every channel, channel after channel.
    pub fn samples(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().flat_map(|f| f.values().iter().copied())
    }
}

pub fn luma(r: &ImageField, g: &ImageField, b: &ImageField) -> ImageField {
    let [wr, wg, wb] = LUMA_WEIGHTS;
    let values = r
        .values()
        .iter()
        .zip(g.values())
        .zip(b.values())
        .map(|((&r, &g), &b)| (wr * r + wg * g + wb * b).clamp(0.0, 1.0))
        .collect();
    ImageField::new(r.height(), r.width(), values).expect("luma of valid channels is valid")
}

fn field_from(width: u32, height: u32, values: Vec<f64>) -> Result<ImageField> {
    ImageField::new(height as usize, width as usize, values)
}

/// Decodes a raster already in memory according to `policy`.
pub fn channels_from_image(img: DynamicImage, policy: ColorPolicy) -> Result<Channels> {
    let (w, h) = (img.width(), img.height());
    if w == 0 || h == 0 {
        return Err(Error::DimensionTooSmall {
            height: h as usize,
            width: w as usize,
        });
    }
    let gray = |vals: Vec<f64>| -> Result<Channels> { Ok(Channels::gray(field_from(w, h, vals)?)) };
    let planes = |rgb: Vec<[f64; 3]>| -> Result<Channels> {
        let split = |k: usize| field_from(w, h, rgb.iter().map(|p| p[k]).collect());
        let (r, g, b) = (split(0)?, split(1)?, split(2)?);
        match policy {
            ColorPolicy::Luma => Ok(Channels::gray(luma(&r, &g, &b))),
            ColorPolicy::PerChannel => Channels::rgb(r, g, b),
        }
    };
    const S8: f64 = u8::MAX as f64;
    const S16: f64 = u16::MAX as f64;
    match img {
        DynamicImage::ImageLuma8(buf) => gray(buf.pixels().map(|p| p[0] as f64 / S8).collect()),
        DynamicImage::ImageLumaA8(buf) => gray(buf.pixels().map(|p| p[0] as f64 / S8).collect()),
        DynamicImage::ImageLuma16(buf) => gray(buf.pixels().map(|p| p[0] as f64 / S16).collect()),
        DynamicImage::ImageLumaA16(buf) => gray(buf.pixels().map(|p| p[0] as f64 / S16).collect()),
        DynamicImage::ImageRgb8(buf) => planes(buf.pixels().map(|p| p.0.map(|c| c as f64 / S8)).collect()),
        DynamicImage::ImageRgba8(buf) => {
            planes(buf.pixels().map(|p| [p[0], p[1], p[2]].map(|c| c as f64 / S8)).collect())
        }
        DynamicImage::ImageRgb16(buf) => planes(buf.pixels().map(|p| p.0.map(|c| c as f64 / S16)).collect()),
        DynamicImage::ImageRgba16(buf) => {
            planes(buf.pixels().map(|p| [p[0], p[1], p[2]].map(|c| c as f64 / S16)).collect())
        }
        other => Err(Error::UnsupportedFormat(format!("{:?}", other.color()))),
    }
}

/// Reads an 8/16-bit grayscale or RGB raster into `[0, 1]` fields.
pub fn ingest_image(path: impl AsRef<Path>, policy: ColorPolicy) -> Result<Channels> {
    let path = path.as_ref();
    let reader = image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    channels_from_image(reader.decode()?, policy)
}

fn quantize(v: f64, depth: BitDepth) -> f64 {
    (v.clamp(0.0, 1.0) * depth.max_code()).round()
}

/// Encodes refined channels as a lossless PNG at the configured bit depth.
/// One channel gives grayscale, three give RGB.
pub fn encode_png(channels: &[ImageField], depth: BitDepth) -> Result<Vec<u8>> {
    let (h, w) = channels[0].dims();
    let (w32, h32) = (w as u32, h as u32);
    let img = match (channels.len(), depth) {
        (1, BitDepth::Eight) => DynamicImage::ImageLuma8(
            ImageBuffer::<Luma<u8>, _>::from_raw(w32, h32, channels[0].values().iter().map(|&v| quantize(v, depth) as u8).collect())
                .expect("buffer sized from dims"),
        ),
        (1, BitDepth::Sixteen) => DynamicImage::ImageLuma16(
            ImageBuffer::<Luma<u16>, _>::from_raw(w32, h32, channels[0].values().iter().map(|&v| quantize(v, depth) as u16).collect())
                .expect("buffer sized from dims"),
        ),
        (3, BitDepth::Eight) => {
            let data = (0..h * w)
                .flat_map(|i| channels.iter().map(move |c| quantize(c.values()[i], depth) as u8))
                .collect();
            DynamicImage::ImageRgb8(ImageBuffer::<Rgb<u8>, _>::from_raw(w32, h32, data).expect("buffer sized from dims"))
        }
        (3, BitDepth::Sixteen) => {
            let data = (0..h * w)
                .flat_map(|i| channels.iter().map(move |c| quantize(c.values()[i], depth) as u16))
                .collect();
            DynamicImage::ImageRgb16(ImageBuffer::<Rgb<u16>, _>::from_raw(w32, h32, data).expect("buffer sized from dims"))
        }
        (n, _) => return Err(Error::UnsupportedFormat(format!("{n} output channels"))),
    };
    let mut bytes = Vec::new();
    img.write_to(&mut std::io::Cursor::new(&mut bytes), image::ImageFormat::Png)?;
    Ok(bytes)
}

/// Integer codes of a field at `depth`, as written by [`encode_png`].
pub fn quantized_codes(field: &ImageField, depth: BitDepth) -> Vec<u16> {
    field.values().iter().map(|&v| quantize(v, depth) as u16).collect()
}
