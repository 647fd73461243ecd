//! Frame rasters, region fills and numbered-PNG directories.

use std::fs;
use std::path::{Path, PathBuf};

use image::{DynamicImage, GrayImage, RgbImage};
use rayon::prelude::*;

use super::{Fill, OcclusionError, OcclusionManifest, Region, MID_GRAY};
use crate::util::write_atomic_with;

/// 8-bit interleaved raster with one (gray) or three (RGB) channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: u32,
    height: u32,
    channels: u8,
    data: Vec<u8>,
}

impl Frame {
    pub fn new(width: u32, height: u32, channels: u8, data: Vec<u8>) -> Result<Self, String> {
        if channels != 1 && channels != 3 {
            return Err(format!("unsupported channel count {channels}"));
        }
        let expected = width as usize * height as usize * channels as usize;
        if data.len() != expected {
            return Err(format!("expected {expected} bytes, got {}", data.len()));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn filled(width: u32, height: u32, channels: u8, value: u8) -> Self {
        let n = width as usize * height as usize * channels as usize;
        Self::new(width, height, channels, vec![value; n]).expect("valid dimensions")
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn pixel(&self, x: u32, y: u32) -> &[u8] {
        let c = self.channels as usize;
        let i = (y as usize * self.width as usize + x as usize) * c;
        &self.data[i..i + c]
    }

    fn index(&self, x: u32, y: u32, ch: usize) -> usize {
        (y as usize * self.width as usize + x as usize) * self.channels as usize + ch
    }

    fn from_image(img: DynamicImage) -> Result<Self, String> {
        match img {
            DynamicImage::ImageLuma8(g) => {
                let (w, h) = g.dimensions();
                Frame::new(w, h, 1, g.into_raw())
            }
            DynamicImage::ImageRgb8(rgb) => {
                let (w, h) = rgb.dimensions();
                Frame::new(w, h, 3, rgb.into_raw())
            }
            other => Err(format!(
                "unsupported pixel format {:?}; expected 8-bit gray or RGB",
                other.color()
            )),
        }
    }

    fn to_image(&self) -> DynamicImage {
        match self.channels {
            1 => DynamicImage::ImageLuma8(
                GrayImage::from_raw(self.width, self.height, self.data.clone()).expect("sized"),
            ),
            _ => DynamicImage::ImageRgb8(
                RgbImage::from_raw(self.width, self.height, self.data.clone()).expect("sized"),
            ),
        }
    }
}

/// Pixel rectangle `(x, y, w, h)` of `region` inside a `width x height` frame.
fn resolve(
    region: Region,
    width: u32,
    height: u32,
) -> Result<(u32, u32, u32, u32), OcclusionError> {
    match region {
        Region::FullFrame => Ok((0, 0, width, height)),
        Region::Rect { x, y, w, h } => {
            let fits = w > 0
                && h > 0
                && x.checked_add(w).is_some_and(|r| r <= width)
                && y.checked_add(h).is_some_and(|b| b <= height);
            if fits {
                Ok((x, y, w, h))
            } else {
                Err(OcclusionError::RegionOutOfBounds {
                    region: region.to_string(),
                    width,
                    height,
                })
            }
        }
    }
}

fn box_blur_pass(src: &[f64], w: usize, h: usize, radius: usize, horizontal: bool) -> Vec<f64> {
    let mut out = vec![0.0; src.len()];
    let (outer, inner) = if horizontal { (h, w) } else { (w, h) };
    let at = |o: usize, i: usize| if horizontal { o * w + i } else { i * w + o };
    for o in 0..outer {
        for i in 0..inner {
            let lo = i.saturating_sub(radius);
            let hi = (i + radius).min(inner - 1);
            let sum: f64 = (lo..=hi).map(|k| src[at(o, k)]).sum();
            out[at(o, i)] = sum / (hi - lo + 1) as f64;
        }
    }
    out
}

/// Fills `region` of `frame` in place.
pub fn fill_region(frame: &mut Frame, region: Region, fill: Fill) -> Result<(), OcclusionError> {
    let (x0, y0, w, h) = resolve(region, frame.width, frame.height)?;
    let channels = frame.channels as usize;
    let coords = move || (y0..y0 + h).flat_map(move |y| (x0..x0 + w).map(move |x| (x, y)));
    match fill {
        Fill::SolidGray => {
            for (x, y) in coords() {
                for ch in 0..channels {
                    let i = frame.index(x, y, ch);
                    frame.data[i] = MID_GRAY;
                }
            }
        }
        Fill::FrameMean => {
            let n = w as u64 * h as u64;
            for ch in 0..channels {
                let sum: u64 = coords()
                    .map(|(x, y)| frame.data[frame.index(x, y, ch)] as u64)
                    .sum();
                let mean = ((2 * sum + n) / (2 * n)) as u8;
                for (x, y) in coords() {
                    let i = frame.index(x, y, ch);
                    frame.data[i] = mean;
                }
            }
        }
        Fill::Blur => {
            let (wu, hu) = (w as usize, h as usize);
            let radius = (wu.min(hu) / 6).max(1);
            for ch in 0..channels {
                let mut plane: Vec<f64> = coords()
                    .map(|(x, y)| frame.data[frame.index(x, y, ch)] as f64)
                    .collect();
                for _ in 0..3 {
                    plane = box_blur_pass(&plane, wu, hu, radius, true);
                    plane = box_blur_pass(&plane, wu, hu, radius, false);
                }
                for ((x, y), v) in coords().zip(plane) {
                    let i = frame.index(x, y, ch);
                    frame.data[i] = v.round().clamp(0.0, 255.0) as u8;
                }
            }
        }
    }
    Ok(())
}

/// Applies the manifest's fills to a frame sequence. Frames outside all
/// windows are returned untouched.
pub fn apply(frames: &[Frame], manifest: &OcclusionManifest) -> Result<Vec<Frame>, OcclusionError> {
    let end = manifest.max_end_frame();
    if end > frames.len() {
        return Err(OcclusionError::FrameIndexOutOfRange {
            end_frame: end,
            frames: frames.len(),
        });
    }
    frames
        .par_iter()
        .enumerate()
        .map(|(i, f)| {
            let mut f = f.clone();
            if manifest.is_occluded(i) {
                fill_region(&mut f, manifest.region, manifest.fill)?;
            }
            Ok(f)
        })
        .collect()
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> OcclusionError {
    OcclusionError::Io(format!("{}: {e}", path.display()))
}

fn is_frame_name(name: &str) -> bool {
    name.len() == 10 && name.ends_with(".png") && name[..6].bytes().all(|b| b.is_ascii_digit())
}

/// Numbered `%06d.png` files in `dir`, in frame order.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>, OcclusionError> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| io_err(dir, e))? {
        let entry = entry.map_err(|e| io_err(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if is_frame_name(&name) {
            out.push(entry.path());
        }
    }
    out.sort();
    Ok(out)
}

pub fn read_frame(path: &Path) -> Result<Frame, OcclusionError> {
    let img = image::open(path).map_err(|e| io_err(path, e))?;
    Frame::from_image(img).map_err(|e| io_err(path, e))
}

/// Encodes `frame` as PNG at `path` via a temporary file and rename.
pub fn write_frame(path: &Path, frame: &Frame) -> Result<(), OcclusionError> {
    let img = frame.to_image();
    write_atomic_with(path, |tmp| {
        img.save_with_format(tmp, image::ImageFormat::Png)
            .map_err(|e| io_err(path, e))
    })
}

impl From<std::io::Error> for OcclusionError {
    fn from(e: std::io::Error) -> Self {
        OcclusionError::Io(e.to_string())
    }
}

/// Applies `manifest` to the frames in `frames_dir`, writing every frame to
/// `out_dir` under its original name. Untouched frames are copied
/// byte-for-byte. Returns the number of frames that were filled.
pub fn apply_dir(
    frames_dir: &Path,
    manifest: &OcclusionManifest,
    out_dir: &Path,
) -> Result<usize, OcclusionError> {
    let paths = list_frames(frames_dir)?;
    let end = manifest.max_end_frame();
    if end > paths.len() {
        return Err(OcclusionError::FrameIndexOutOfRange {
            end_frame: end,
            frames: paths.len(),
        });
    }
    fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
    let filled = paths
        .par_iter()
        .enumerate()
        .map(|(i, src)| {
            let dst = out_dir.join(src.file_name().expect("listed file"));
            if manifest.is_occluded(i) {
                let mut frame = read_frame(src).map_err(|e| match e {
                    OcclusionError::Io(m) => OcclusionError::BadFrame {
                        index: i,
                        message: m,
                    },
                    other => other,
                })?;
                fill_region(&mut frame, manifest.region, manifest.fill)?;
                write_frame(&dst, &frame)?;
                Ok(1)
            } else {
                let bytes = fs::read(src).map_err(|e| io_err(src, e))?;
                crate::util::write_atomic(&dst, &bytes).map_err(|e| io_err(&dst, e))?;
                Ok(0)
            }
        })
        .collect::<Result<Vec<usize>, OcclusionError>>()?;
    Ok(filled.iter().sum())
}
