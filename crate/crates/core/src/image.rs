//! Profile-image preprocessing: choose the largest detected face, reject
//! small files, crop, bilinearly resize to 28x28 and scale to `[0, 1]`.

use alloc::vec::Vec;

/// Output side length in pixels.
pub const FACE_SIZE: usize = 28;
pub const CHANNELS: usize = 3;
/// Values per face tensor.
pub const TENSOR_LEN: usize = FACE_SIZE * FACE_SIZE * CHANNELS;
/// Default minimum original file size: 18 KiB.
pub const DEFAULT_MIN_BYTES: u64 = 18 * 1024;
/// Crops more elongated than this are kept but flagged.
pub const MAX_ASPECT_RATIO: f64 = 2.0;

/// Axis-aligned face box in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaceBox {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl FaceBox {
    pub fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        FaceBox { x, y, w, h }
    }

    pub fn area(&self) -> u64 {
        self.w as u64 * self.h as u64
    }

    /// Intersection with a `width` x `height` image; `None` if empty.
    pub fn clamp(&self, width: u32, height: u32) -> Option<FaceBox> {
        let x0 = self.x.min(width);
        let y0 = self.y.min(height);
        let x1 = (self.x as u64 + self.w as u64).min(width as u64) as u32;
        let y1 = (self.y as u64 + self.h as u64).min(height as u64) as u32;
        (x1 > x0 && y1 > y0).then(|| FaceBox { x: x0, y: y0, w: x1 - x0, h: y1 - y0 })
    }
}

/// A decoded profile image with externally detected faces.
#[derive(Debug, Clone, PartialEq)]
pub struct RawProfileImage {
    pub user_id: u64,
    /// Size of the original encoded file.
    pub byte_size: u64,
    pub width: u32,
    pub height: u32,
    /// Row-major RGB, `width * height * 3` bytes.
    pub pixels: Vec<u8>,
    pub faces: Vec<FaceBox>,
}

/// A normalized 28x28x3 face crop, row-major `(row, column, channel)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceTensor {
    pub user_id: u64,
    data: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ImageError {
    #[error("image {user_id}: pixel buffer has {actual} bytes, expected {expected}")]
    PixelBuffer { user_id: u64, expected: usize, actual: usize },
    #[error("image {user_id}: zero-sized image")]
    Empty { user_id: u64 },
    #[error("tensor has {0} values, expected {TENSOR_LEN}")]
    TensorShape(usize),
    #[error("tensor value {value} at {index} outside [0, 1]")]
    TensorRange { index: usize, value: f32 },
}

impl FaceTensor {
    pub fn new(user_id: u64, data: Vec<f32>) -> Result<Self, ImageError> {
        if data.len() != TENSOR_LEN {
            return Err(ImageError::TensorShape(data.len()));
        }
        if let Some((index, &value)) =
            data.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(ImageError::TensorRange { index, value });
        }
        Ok(FaceTensor { user_id, data })
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize, channel: usize) -> f32 {
        self.data[(row * FACE_SIZE + col) * CHANNELS + channel]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    NoFace,
    TooSmall,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::NoFace => "no-face",
            RejectReason::TooSmall => "too-small",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rejection {
    pub user_id: u64,
    pub reason: RejectReason,
}

/// A non-fatal note about an emitted tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AspectWarning {
    pub user_id: u64,
    /// Long side over short side of the clamped crop.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Preprocessed {
    Accepted { tensor: FaceTensor, warning: Option<AspectWarning> },
    Rejected(Rejection),
}

/// Picks the largest-area face, first occurrence winning ties.
pub fn largest_face(faces: &[FaceBox], width: u32, height: u32) -> Option<FaceBox> {
    let mut best: Option<FaceBox> = None;
    for face in faces.iter().filter_map(|f| f.clamp(width, height)) {
        if best.is_none_or(|b| face.area() > b.area()) {
            best = Some(face);
        }
    }
    best
}

pub fn preprocess(image: &RawProfileImage, min_bytes: u64) -> Result<Preprocessed, ImageError> {
    let expected = image.width as usize * image.height as usize * CHANNELS;
    if image.width == 0 || image.height == 0 {
        return Err(ImageError::Empty { user_id: image.user_id });
    }
    if image.pixels.len() != expected {
        return Err(ImageError::PixelBuffer {
            user_id: image.user_id,
            expected,
            actual: image.pixels.len(),
        });
    }
    let reject = |reason| Ok(Preprocessed::Rejected(Rejection { user_id: image.user_id, reason }));
    let Some(face) = largest_face(&image.faces, image.width, image.height) else {
        return reject(RejectReason::NoFace);
    };
    if image.byte_size < min_bytes {
        return reject(RejectReason::TooSmall);
    }

    let resized = resize_bilinear(&image.pixels, image.width as usize, face, FACE_SIZE, FACE_SIZE);
    let data = resized.into_iter().map(|v| (v / 255.0).clamp(0.0, 1.0) as f32).collect();
    let (long, short) = (face.w.max(face.h) as f64, face.w.min(face.h) as f64);
    let ratio = long / short;
    let warning = (ratio > MAX_ASPECT_RATIO).then_some(AspectWarning { user_id: image.user_id, ratio });
    Ok(Preprocessed::Accepted { tensor: FaceTensor { user_id: image.user_id, data }, warning })
}

/// Bilinearly resamples the `crop` region of a row-major RGB image of the
/// given `stride` width to `out_w` x `out_h`.
///
/// Pixel-center aligned: output pixel `i` samples source coordinate
/// `(i + 0.5) * scale - 0.5`, clamped to the crop.
pub fn resize_bilinear(pixels: &[u8], stride: usize, crop: FaceBox, out_w: usize, out_h: usize) -> Vec<f64> {
    let axis = |out: usize, len: u32| -> Vec<(usize, usize, f64)> {
        let scale = len as f64 / out as f64;
        let max = (len - 1) as f64;
        (0..out)
            .map(|i| {
                let s = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, max);
                let lo = libm::floor(s) as usize;
                let hi = (lo + 1).min(len as usize - 1);
                (lo, hi, s - lo as f64)
            })
            .collect()
    };
    let xs = axis(out_w, crop.w);
    let ys = axis(out_h, crop.h);
    let at = |row: usize, col: usize, c: usize| -> f64 {
        pixels[((crop.y as usize + row) * stride + crop.x as usize + col) * CHANNELS + c] as f64
    };
    let mut out = Vec::with_capacity(out_w * out_h * CHANNELS);
    for &(y0, y1, fy) in &ys {
        for &(x0, x1, fx) in &xs {
            for c in 0..CHANNELS {
                let top = at(y0, x0, c) * (1.0 - fx) + at(y0, x1, c) * fx;
                let bottom = at(y1, x0, c) * (1.0 - fx) + at(y1, x1, c) * fx;
                out.push(top * (1.0 - fy) + bottom * fy);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BatchOutput {
    pub tensors: Vec<FaceTensor>,
    pub rejections: Vec<Rejection>,
    pub warnings: Vec<AspectWarning>,
}

/// Preprocesses images in order. Every input yields either a tensor or a
/// rejection entry; a malformed pixel buffer aborts the batch.
pub fn batch_preprocess(images: &[RawProfileImage], min_bytes: u64) -> Result<BatchOutput, ImageError> {
    let mut out = BatchOutput::default();
    for image in images {
        match preprocess(image, min_bytes)? {
            Preprocessed::Accepted { tensor, warning } => {
                out.tensors.push(tensor);
                out.warnings.extend(warning);
            }
            Preprocessed::Rejected(r) => out.rejections.push(r),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn uniform(user_id: u64, w: u32, h: u32, gray: u8, faces: Vec<FaceBox>) -> RawProfileImage {
        RawProfileImage {
            user_id,
            byte_size: 20_000,
            width: w,
            height: h,
            pixels: vec![gray; (w * h * 3) as usize],
            faces,
        }
    }

    #[test]
    fn picks_largest_face_first_on_ties() {
        let faces = [FaceBox::new(0, 0, 10, 10), FaceBox::new(5, 5, 30, 30)];
        assert_eq!(largest_face(&faces, 100, 100), Some(FaceBox::new(5, 5, 30, 30)));
        let tied = [FaceBox::new(0, 0, 10, 20), FaceBox::new(50, 50, 20, 10)];
        assert_eq!(largest_face(&tied, 100, 100), Some(tied[0]));
    }

    #[test]
    fn clamps_boxes_to_bounds() {
        assert_eq!(FaceBox::new(90, 90, 30, 30).clamp(100, 100), Some(FaceBox::new(90, 90, 10, 10)));
        assert_eq!(FaceBox::new(100, 0, 5, 5).clamp(100, 100), None);
    }

    #[test]
    fn rejects_small_files_and_faceless_images() {
        let mut img = uniform(1, 40, 40, 10, vec![FaceBox::new(0, 0, 40, 40)]);
        img.byte_size = 17_000;
        assert_eq!(
            preprocess(&img, DEFAULT_MIN_BYTES).unwrap(),
            Preprocessed::Rejected(Rejection { user_id: 1, reason: RejectReason::TooSmall })
        );
        let img = uniform(2, 40, 40, 10, vec![]);
        assert_eq!(
            preprocess(&img, DEFAULT_MIN_BYTES).unwrap(),
            Preprocessed::Rejected(Rejection { user_id: 2, reason: RejectReason::NoFace })
        );
    }

    #[test]
    fn threshold_is_inclusive() {
        let mut img = uniform(1, 28, 28, 10, vec![FaceBox::new(0, 0, 28, 28)]);
        img.byte_size = DEFAULT_MIN_BYTES;
        assert!(matches!(preprocess(&img, DEFAULT_MIN_BYTES).unwrap(), Preprocessed::Accepted { .. }));
        img.byte_size = DEFAULT_MIN_BYTES - 1;
        assert!(matches!(preprocess(&img, DEFAULT_MIN_BYTES).unwrap(), Preprocessed::Rejected(_)));
    }

    #[test]
    fn constant_crop_is_resize_invariant() {
        let img = uniform(3, 56, 56, 77, vec![FaceBox::new(0, 0, 56, 56)]);
        let Preprocessed::Accepted { tensor, warning } = preprocess(&img, DEFAULT_MIN_BYTES).unwrap() else {
            panic!("rejected");
        };
        assert!(warning.is_none());
        assert_eq!(tensor.data().len(), TENSOR_LEN);
        let want = (77.0f64 / 255.0) as f32;
        assert!(tensor.data().iter().all(|&v| v == want));
    }

    #[test]
    fn malformed_buffer_fails() {
        let mut img = uniform(4, 10, 10, 0, vec![FaceBox::new(0, 0, 5, 5)]);
        img.pixels.pop();
        assert!(matches!(preprocess(&img, 0), Err(ImageError::PixelBuffer { .. })));
    }

    #[test]
    fn elongated_crop_warns() {
        let img = uniform(5, 100, 100, 0, vec![FaceBox::new(0, 0, 90, 30)]);
        let Preprocessed::Accepted { warning, .. } = preprocess(&img, 0).unwrap() else { panic!() };
        assert_eq!(warning, Some(AspectWarning { user_id: 5, ratio: 3.0 }));
    }

    #[test]
    fn batch_keeps_order_and_accounts_for_every_image() {
        let images = vec![
            uniform(1, 30, 30, 5, vec![FaceBox::new(0, 0, 30, 30)]),
            uniform(2, 30, 30, 5, vec![]),
            uniform(3, 30, 30, 5, vec![FaceBox::new(1, 1, 20, 20)]),
        ];
        let out = batch_preprocess(&images, DEFAULT_MIN_BYTES).unwrap();
        assert_eq!(out.tensors.iter().map(|t| t.user_id).collect::<Vec<_>>(), vec![1, 3]);
        assert_eq!(out.rejections, vec![Rejection { user_id: 2, reason: RejectReason::NoFace }]);
        let all_rejected = batch_preprocess(&images[1..2], 0).unwrap();
        assert!(all_rejected.tensors.is_empty());
        assert_eq!(all_rejected.rejections.len(), 1);
    }

    #[test]
    fn tensor_constructor_checks_shape_and_range() {
        assert!(FaceTensor::new(1, vec![0.0; 10]).is_err());
        let mut data = vec![0.5; TENSOR_LEN];
        data[7] = 1.5;
        assert!(matches!(FaceTensor::new(1, data), Err(ImageError::TensorRange { index: 7, .. })));
    }
}
