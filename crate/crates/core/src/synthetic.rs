//! Seeded synthetic data for exercising the pipeline without real profiles.

use alloc::vec::Vec;

use crate::gender::Gender;
use crate::image::{FaceTensor, CHANNELS, FACE_SIZE, TENSOR_LEN};
use crate::rng;

/// A face-like tensor whose top half is brighter for `Male` and whose bottom
/// half is brighter for `Female`, with per-image brightness jitter and
/// per-pixel noise. The two classes are linearly separable.
pub fn separable_face(user_id: u64, gender: Gender, seed: u64) -> FaceTensor {
    let mut stream = rng::stream(seed, &[0xFACE, user_id]);
    let background = 0.15 + 0.2 * rng::open_unit(&mut stream);
    let contrast = 0.3 + 0.2 * rng::open_unit(&mut stream);
    let mut data = Vec::with_capacity(TENSOR_LEN);
    for row in 0..FACE_SIZE {
        let top = row < FACE_SIZE / 2;
        let bright = top == (gender == Gender::Male);
        for _col in 0..FACE_SIZE {
            for _c in 0..CHANNELS {
                let noise = 0.2 * (rng::open_unit(&mut stream) - 0.5);
                let v = background + if bright { contrast } else { 0.0 } + noise;
                data.push(v.clamp(0.0, 1.0) as f32);
            }
        }
    }
    FaceTensor::new(user_id, data).expect("values are clamped to [0, 1]")
}

/// `count` labeled separable faces, alternating male and female, with user
/// IDs `first_id..first_id + count`.
pub fn separable_dataset(count: usize, first_id: u64, seed: u64) -> Vec<(FaceTensor, Gender)> {
    (0..count as u64)
        .map(|i| {
            let gender = if i % 2 == 0 { Gender::Male } else { Gender::Female };
            (separable_face(first_id + i, gender, seed), gender)
        })
        .collect()
}

/// Uniform-noise tensor.
pub fn noise_face(user_id: u64, seed: u64) -> FaceTensor {
    let mut stream = rng::stream(seed, &[0x0015E, user_id]);
    let data = (0..TENSOR_LEN).map(|_| rng::open_unit(&mut stream) as f32).collect();
    FaceTensor::new(user_id, data).expect("open unit draws are in range")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_faces_differ_by_half() {
        let m = separable_face(1, Gender::Male, 3);
        let f = separable_face(2, Gender::Female, 3);
        let half = |t: &FaceTensor, top: bool| -> f32 {
            let rows = if top { 0..14 } else { 14..28 };
            rows.flat_map(|r| (0..28).map(move |c| (r, c))).map(|(r, c)| t.get(r, c, 0)).sum()
        };
        assert!(half(&m, true) > half(&m, false));
        assert!(half(&f, false) > half(&f, true));
        assert_eq!(separable_face(1, Gender::Male, 3), m);
    }
}
