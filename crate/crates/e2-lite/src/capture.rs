//! Capture-to-file mode: frames are written verbatim (length prefix
//! included) so a capture file is itself a valid frame stream that can be
//! replayed through the decoder.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::codec::FrameDecoder;
use crate::msg::E2Message;
use crate::{DecodeError, E2Error};

/// Appends raw frames to a capture file.
pub struct CaptureWriter {
    out: BufWriter<File>,
    pub frames: u64,
}

impl CaptureWriter {
    pub fn create(path: &Path) -> Result<Self, E2Error> {
        let file = File::create(path).map_err(|e| E2Error::Io(e.to_string()))?;
        Ok(Self {
            out: BufWriter::new(file),
            frames: 0,
        })
    }

    /// Writes one already-encoded frame exactly as it crossed the wire.
    pub fn write_frame(&mut self, frame: &[u8]) -> Result<(), E2Error> {
        self.out
            .write_all(frame)
            .map_err(|e| E2Error::Io(e.to_string()))?;
        self.frames += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), E2Error> {
        self.out.flush().map_err(|e| E2Error::Io(e.to_string()))
    }
}

/// Replays a capture file as decoded messages.
pub fn replay(path: &Path) -> Result<Vec<E2Message>, E2Error> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| E2Error::Io(e.to_string()))?;
    let mut decoder = FrameDecoder::new();
    decoder.push(&bytes);
    let mut out = Vec::new();
    loop {
        match decoder.next() {
            Ok(Some(msg)) => out.push(msg),
            Ok(None) => break,
            Err(e @ DecodeError::Protocol { .. }) | Err(e @ DecodeError::UnknownMessage { .. }) => {
                return Err(E2Error::Decode(e))
            }
            Err(DecodeError::NeedMoreBytes) => break,
        }
    }
    if decoder.pending_bytes() > 0 {
        return Err(E2Error::Io(format!(
            "capture ends with {} bytes of an incomplete frame",
            decoder.pending_bytes()
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::encode;

    #[test]
    fn capture_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("frames.cap");
        let messages = vec![
            E2Message::SetupRequest {
                bs_id: 1,
                supported_sm_ids: crate::SmId::ALL.to_vec(),
            },
            E2Message::SetupResponse { accepted: true },
        ];
        let mut w = CaptureWriter::create(&path).unwrap();
        for m in &messages {
            w.write_frame(&encode(m).unwrap()).unwrap();
        }
        w.finish().unwrap();
        assert_eq!(replay(&path).unwrap(), messages);
    }

    #[test]
    fn truncated_capture_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cut.cap");
        let frame = encode(&E2Message::SetupResponse { accepted: false }).unwrap();
        std::fs::write(&path, &frame[..frame.len() - 2]).unwrap();
        assert!(replay(&path).is_err());
    }
}
