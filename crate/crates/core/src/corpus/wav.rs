use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::{AudioClip, CorpusError};

const PCM_SCALE: f64 = 32768.0;

/// Reads a RIFF/WAVE file holding 16-bit mono PCM.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioClip, CorpusError> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(CorpusError::NotFound(path.to_path_buf()));
    }
    let unsupported = |reason: String| CorpusError::UnsupportedFormat { path: path.to_path_buf(), reason };
    let mut reader = WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(source) if source.kind() == std::io::ErrorKind::UnexpectedEof => {
            CorpusError::TruncatedFile(path.to_path_buf())
        }
        hound::Error::IoError(source) => CorpusError::Io { path: path.to_path_buf(), source },
        other => unsupported(other.to_string()),
    })?;
    let spec = reader.spec();
    if spec.sample_format != SampleFormat::Int {
        return Err(unsupported("not integer PCM".into()));
    }
    if spec.channels != 1 {
        return Err(unsupported(format!("{} channels, expected mono", spec.channels)));
    }
    if spec.bits_per_sample != 16 {
        return Err(unsupported(format!("{} bits per sample, expected 16", spec.bits_per_sample)));
    }
    let declared = reader.len() as usize;
    let mut samples = Vec::with_capacity(declared);
    for s in reader.samples::<i16>() {
        match s {
            Ok(v) => samples.push(v as f64 / PCM_SCALE),
            // hound reports a short data chunk as a generic read error
            Err(hound::Error::IoError(_)) => return Err(CorpusError::TruncatedFile(path.to_path_buf())),
            Err(other) => return Err(unsupported(other.to_string())),
        }
    }
    if samples.len() < declared {
        return Err(CorpusError::TruncatedFile(path.to_path_buf()));
    }
    if samples.is_empty() {
        return Err(unsupported("no samples".into()));
    }
    Ok(AudioClip::new(samples, spec.sample_rate))
}

/// 16-bit quantization as applied by [`write_wav`]: round to nearest, clamp.
pub fn quantize_i16(x: f64) -> i16 {
    (x * PCM_SCALE).round().clamp(i16::MIN as f64, i16::MAX as f64) as i16
}

pub fn write_wav(path: impl AsRef<Path>, clip: &AudioClip) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let spec = WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate_hz,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let to_io = |e: hound::Error| match e {
        hound::Error::IoError(source) => CorpusError::Io { path: path.to_path_buf(), source },
        other => CorpusError::Io { path: path.to_path_buf(), source: std::io::Error::other(other.to_string()) },
    };
    let mut writer = WavWriter::create(path, spec).map_err(to_io)?;
    for &x in &clip.samples {
        writer.write_sample(quantize_i16(x)).map_err(to_io)?;
    }
    writer.finalize().map_err(to_io)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_raw(path: &Path, channels: u16, bits: u16, samples: &[i32]) {
        let spec = WavSpec { channels, sample_rate: 8000, bits_per_sample: bits, sample_format: SampleFormat::Int };
        let mut w = WavWriter::create(path, spec).unwrap();
        for &s in samples {
            match bits {
                16 => w.write_sample(s as i16).unwrap(),
                _ => w.write_sample(s).unwrap(),
            }
        }
        w.finalize().unwrap();
    }

    #[test]
    fn silence_reads_as_zeros() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("z.wav");
        write_raw(&p, 1, 16, &vec![0; 8000]);
        let clip = read_wav(&p).unwrap();
        assert_eq!(clip.sample_rate_hz, 8000);
        assert_eq!(clip.samples.len(), 8000);
        assert!(clip.samples.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn constant_16384_is_half_scale() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("h.wav");
        write_raw(&p, 1, 16, &vec![16384; 100]);
        let clip = read_wav(&p).unwrap();
        assert!(clip.samples.iter().all(|&x| x == 0.5));
    }

    #[test]
    fn rejects_stereo_and_24_bit() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.wav");
        write_raw(&p, 2, 16, &[1, 2, 3, 4]);
        assert!(matches!(read_wav(&p), Err(CorpusError::UnsupportedFormat { .. })));
        let p = dir.path().join("b.wav");
        write_raw(&p, 1, 24, &[1, 2, 3, 4]);
        assert!(matches!(read_wav(&p), Err(CorpusError::UnsupportedFormat { .. })));
    }

    #[test]
    fn missing_file_is_not_found() {
        assert!(matches!(read_wav("/definitely/not/here.wav"), Err(CorpusError::NotFound(_))));
    }

    #[test]
    fn truncated_data_chunk() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.wav");
        write_raw(&p, 1, 16, &vec![7; 1000]);
        let bytes = std::fs::read(&p).unwrap();
        std::fs::write(&p, &bytes[..bytes.len() - 501]).unwrap();
        assert!(matches!(read_wav(&p), Err(CorpusError::TruncatedFile(_))));
    }

    #[test]
    fn write_then_read_quantizes_once() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.wav");
        let clip = AudioClip::new((0..500).map(|i| (i as f64 * 0.37).sin() * 0.8).collect(), 16000);
        write_wav(&p, &clip).unwrap();
        let back = read_wav(&p).unwrap();
        for (a, b) in clip.samples.iter().zip(&back.samples) {
            assert_eq!(quantize_i16(*a) as f64 / 32768.0, *b);
        }
        write_wav(&p, &back).unwrap();
        assert_eq!(read_wav(&p).unwrap(), back);
    }
}
