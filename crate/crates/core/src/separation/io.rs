//! Mono WAV files and the binary spectrogram dump.
//!
//! Dump layout (little-endian): 8-byte magic `PHUNSPEC`, `u32` F, `u32` T,
//! then `F × T` complex values row-major, each as `f64` re followed by `f64` im.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::{PhunError, Result};
use crate::linalg::C64;

use super::Spectrogram;

pub const SPEC_MAGIC: &[u8; 8] = b"PHUNSPEC";

/// Reads a mono WAV file (16-bit PCM or 32-bit float) as samples in [−1, 1].
pub fn read_wav_mono(path: impl AsRef<Path>) -> Result<(Vec<f64>, u32)> {
    let reader = WavReader::open(path.as_ref())?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(PhunError::Format(format!(
            "{}: expected mono audio, found {} channels",
            path.as_ref().display(),
            spec.channels
        )));
    }
    let samples = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<std::result::Result<Vec<_>, _>>()?,
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<Vec<_>, _>>()?,
        (fmt, bits) => {
            return Err(PhunError::Format(format!(
                "unsupported WAV encoding: {fmt:?} with {bits} bits"
            )))
        }
    };
    Ok((samples, spec.sample_rate))
}

/// Writes 32-bit float mono WAV.
pub fn write_wav_mono(path: impl AsRef<Path>, samples: &[f64], sample_rate: u32) -> Result<()> {
    let spec = WavSpec {
        channels: 1,
        sample_rate,
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    let mut writer = WavWriter::create(path, spec)?;
    for &s in samples {
        writer.write_sample(s as f32)?;
    }
    writer.finalize()?;
    Ok(())
}

pub fn write_spectrogram<W: Write>(spec: &Spectrogram, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    out.write_all(SPEC_MAGIC)?;
    let dim = |v: usize| {
        u32::try_from(v).map_err(|_| PhunError::Format(format!("dimension {v} exceeds u32")))
    };
    out.write_all(&dim(spec.bins())?.to_le_bytes())?;
    out.write_all(&dim(spec.frames())?.to_le_bytes())?;
    for z in spec.data() {
        out.write_all(&z.re.to_le_bytes())?;
        out.write_all(&z.im.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_spectrogram<R: Read>(input: R) -> Result<Spectrogram> {
    let mut input = BufReader::new(input);
    let mut header = [0u8; 16];
    input.read_exact(&mut header)?;
    if &header[..8] != SPEC_MAGIC {
        return Err(PhunError::Format("missing PHUNSPEC magic".into()));
    }
    let bins = u32::from_le_bytes(header[8..12].try_into().expect("4 bytes")) as usize;
    let frames = u32::from_le_bytes(header[12..16].try_into().expect("4 bytes")) as usize;
    let mut data = Vec::with_capacity(bins * frames);
    let mut buf = [0u8; 16];
    for _ in 0..bins * frames {
        input.read_exact(&mut buf)?;
        let re = f64::from_le_bytes(buf[..8].try_into().expect("8 bytes"));
        let im = f64::from_le_bytes(buf[8..].try_into().expect("8 bytes"));
        data.push(C64::new(re, im));
    }
    if input.read(&mut buf)? != 0 {
        return Err(PhunError::Format("trailing bytes after spectrogram data".into()));
    }
    Ok(Spectrogram::from_data(bins, frames, data).expect("length matches"))
}

/// Convenience wrapper around [`read_spectrogram`] for files.
pub fn read_spectrogram_file(path: impl AsRef<Path>) -> Result<Spectrogram> {
    read_spectrogram(File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_layout_is_bit_exact() {
        let mut s = Spectrogram::zeros(2, 1);
        s.set(1, 0, C64::new(1.5, -2.0));
        let mut bytes = Vec::new();
        write_spectrogram(&s, &mut bytes).unwrap();
        assert_eq!(bytes.len(), 16 + 2 * 16);
        assert_eq!(&bytes[..8], b"PHUNSPEC");
        assert_eq!(&bytes[8..16], &[2, 0, 0, 0, 1, 0, 0, 0]);
        assert_eq!(&bytes[32..40], &1.5f64.to_le_bytes());
        assert_eq!(&bytes[40..48], &(-2.0f64).to_le_bytes());
        assert_eq!(read_spectrogram(bytes.as_slice()).unwrap(), s);

        bytes[0] = b'X';
        assert!(read_spectrogram(bytes.as_slice()).is_err());
    }

    #[test]
    fn wav_round_trip_and_rejections() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.wav");
        let x = vec![0.0, 0.25, -0.5, 0.125];
        write_wav_mono(&path, &x, 16_000).unwrap();
        let (y, sr) = read_wav_mono(&path).unwrap();
        assert_eq!(sr, 16_000);
        assert_eq!(x, y);

        let pcm = dir.path().join("pcm.wav");
        let spec = WavSpec { channels: 1, sample_rate: 8000, bits_per_sample: 16, sample_format: SampleFormat::Int };
        let mut w = WavWriter::create(&pcm, spec).unwrap();
        w.write_sample(16384i16).unwrap();
        w.finalize().unwrap();
        assert_eq!(read_wav_mono(&pcm).unwrap(), (vec![0.5], 8000));

        let stereo = dir.path().join("st.wav");
        let spec = WavSpec { channels: 2, ..spec };
        let mut w = WavWriter::create(&stereo, spec).unwrap();
        w.write_sample(0i16).unwrap();
        w.write_sample(0i16).unwrap();
        w.finalize().unwrap();
        assert!(read_wav_mono(&stereo).is_err());
    }
}
