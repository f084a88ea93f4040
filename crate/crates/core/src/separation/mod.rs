//! Informed source separation in the STFT domain: each time-frequency bin is
//! an independent phase-unmixing problem.

mod io;
mod mixing;
mod separate;
mod stft;
mod synth;

pub use io::{
    read_spectrogram, read_spectrogram_file, read_wav_mono, write_spectrogram, write_wav_mono,
    SPEC_MAGIC,
};
pub use mixing::{mix_stft, mixing_matrix, MixSpec};
pub use separate::{sdr, separate, separate_with, BinProblem, SeparationConfig, SDR_CAP_DB};
pub use stft::{istft, stft, StftConfig, WindowKind};
pub use synth::synthetic_sources;

use crate::linalg::{C64, ZERO};

/// Complex `F × T` matrix stored row-major (bin-major).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    bins: usize,
    frames: usize,
    data: Vec<C64>,
}

impl Spectrogram {
    pub fn zeros(bins: usize, frames: usize) -> Spectrogram {
        Spectrogram {
            bins,
            frames,
            data: vec![ZERO; bins * frames],
        }
    }

    pub fn from_data(bins: usize, frames: usize, data: Vec<C64>) -> Option<Spectrogram> {
        (data.len() == bins * frames).then_some(Spectrogram { bins, frames, data })
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.bins, self.frames)
    }

    pub fn get(&self, f: usize, t: usize) -> C64 {
        self.data[f * self.frames + t]
    }

    pub fn set(&mut self, f: usize, t: usize, v: C64) {
        self.data[f * self.frames + t] = v;
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    /// Entrywise modulus as a real-valued spectrogram.
    pub fn magnitude(&self) -> Spectrogram {
        Spectrogram {
            bins: self.bins,
            frames: self.frames,
            data: self.data.iter().map(|z| C64::from(z.norm())).collect(),
        }
    }
}
