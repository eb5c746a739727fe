//! The `FDSN` binary container for keys and ciphertexts.
//!
//! Every file starts with the magic `FDSN`, a little-endian `u16` format
//! version, a kind byte, a reserved zero byte and a 40-byte parameter
//! block. The payload that follows is a sequence of little-endian integers;
//! see `docs/formats.md`.

use std::path::Path;

use spiketfhe_core::bootstrap::BootstrapKey;
use spiketfhe_core::decomposition::Decomposer;
use spiketfhe_core::keyswitch::KeySwitchKey;
use spiketfhe_core::lwe::{LweCiphertext, LweSecretKey};
use spiketfhe_core::model::Shape;
use spiketfhe_core::network::{CipherTensor, ClientKey, ServerKey};
use spiketfhe_core::rgsw::RgswCiphertext;
use spiketfhe_core::rlwe::{RingSecretKey, RlweCiphertext};
use spiketfhe_core::FheParams;

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"FDSN";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 8 + PARAMS_LEN;
const PARAMS_LEN: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Kind {
    LweSecretKey = 1,
    RingSecretKey = 2,
    BootstrapKey = 3,
    LweCiphertext = 4,
    CipherTensor = 5,
    ClientKey = 6,
    ServerKey = 7,
    CiphertextList = 8,
}

impl Kind {
    fn from_u8(b: u8) -> Result<Kind> {
        Ok(match b {
            1 => Kind::LweSecretKey,
            2 => Kind::RingSecretKey,
            3 => Kind::BootstrapKey,
            4 => Kind::LweCiphertext,
            5 => Kind::CipherTensor,
            6 => Kind::ClientKey,
            7 => Kind::ServerKey,
            8 => Kind::CiphertextList,
            _ => return Err(Error::Format(format!("unknown kind byte {b}"))),
        })
    }
}

#[derive(Default)]
struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u16(&mut self, v: u16) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u32(&mut self, v: usize) {
        let v = u32::try_from(v).expect("length fits in u32");
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u64s(&mut self, vs: &[u64]) {
        self.buf.reserve(vs.len() * 8);
        for &v in vs {
            self.u64(v);
        }
    }
    fn bits(&mut self, vs: &[u64]) {
        self.u32(vs.len());
        self.buf.extend(vs.iter().map(|&v| v as u8));
    }

    fn header(&mut self, kind: Kind, params: &FheParams) {
        self.buf.extend_from_slice(&MAGIC);
        self.u16(VERSION);
        self.u8(kind as u8);
        self.u8(0);
        self.params(params);
    }

    fn params(&mut self, p: &FheParams) {
        self.u32(p.lwe_dimension);
        self.u32(p.ring_dimension);
        self.u64(p.plaintext_modulus);
        self.f64(p.noise_std);
        self.u32(p.bsk_base_log as usize);
        self.u32(p.bsk_levels);
        self.u32(p.ksk_base_log as usize);
        self.u32(p.ksk_levels);
    }

    fn lwe(&mut self, ct: &LweCiphertext) {
        self.u64s(&ct.a);
        self.u64(ct.b);
    }

    fn bootstrap_key(&mut self, bsk: &BootstrapKey) {
        self.u32(bsk.bsk.len());
        for g in &bsk.bsk {
            self.u32(g.rows.len());
            self.u32(g.decomposer.base_log as usize);
            self.u32(g.decomposer.levels);
            for row in &g.rows {
                self.u64s(&row.a);
                self.u64s(&row.b);
            }
        }
        let ksk = &bsk.ksk;
        self.u32(ksk.input_dimension);
        self.u32(ksk.output_dimension);
        self.u32(ksk.decomposer.base_log as usize);
        self.u32(ksk.decomposer.levels);
        self.u32(ksk.keys.len());
        for ct in &ksk.keys {
            self.lwe(ct);
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| {
            Error::Format(format!("truncated: need {n} bytes at offset {}, have {}", self.pos, self.buf.len()))
        })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn u64s(&mut self, n: usize) -> Result<Vec<u64>> {
        let bytes = self.take(n.checked_mul(8).ok_or_else(|| Error::Format("length overflow".into()))?)?;
        Ok(bytes.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())).collect())
    }
    fn bits(&mut self) -> Result<Vec<u64>> {
        let n = self.u32()?;
        let bytes = self.take(n)?;
        if bytes.iter().any(|&b| b > 1) {
            return Err(Error::Format("secret key coefficient is not a bit".into()));
        }
        Ok(bytes.iter().map(|&b| b as u64).collect())
    }

    fn header(&mut self, expected: Kind) -> Result<FheParams> {
        if self.take(4)? != MAGIC {
            return Err(Error::Format("bad magic, not an FDSN file".into()));
        }
        let version = self.u16()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported format version {version}")));
        }
        let kind = Kind::from_u8(self.u8()?)?;
        if kind != expected {
            return Err(Error::Format(format!("expected {expected:?}, found {kind:?}")));
        }
        self.u8()?;
        self.params()
    }

    fn params(&mut self) -> Result<FheParams> {
        let params = FheParams {
            lwe_dimension: self.u32()?,
            ring_dimension: self.u32()?,
            plaintext_modulus: self.u64()?,
            noise_std: self.f64()?,
            bsk_base_log: self.u32()? as u32,
            bsk_levels: self.u32()?,
            ksk_base_log: self.u32()? as u32,
            ksk_levels: self.u32()?,
        };
        params.validate()?;
        Ok(params)
    }

    fn lwe(&mut self, dim: usize) -> Result<LweCiphertext> {
        let a = self.u64s(dim)?;
        Ok(LweCiphertext { a, b: self.u64()? })
    }

    fn decomposer(&mut self) -> Result<Decomposer> {
        let base_log = self.u32()? as u32;
        let levels = self.u32()?;
        if base_log == 0 || base_log > 32 || levels == 0 || base_log as usize * levels > 64 {
            return Err(Error::Format(format!("bad gadget 2^{base_log} x {levels}")));
        }
        Ok(Decomposer::new(base_log, levels))
    }

    fn bootstrap_key(&mut self, params: FheParams) -> Result<BootstrapKey> {
        let n = params.ring_dimension;
        let count = self.u32()?;
        let mut bsk = Vec::with_capacity(count.min(1 << 16));
        for _ in 0..count {
            let rows_len = self.u32()?;
            let decomposer = self.decomposer()?;
            if rows_len != 2 * decomposer.levels {
                return Err(Error::Format(format!("RGSW has {rows_len} rows, expected {}", 2 * decomposer.levels)));
            }
            let mut rows = Vec::with_capacity(rows_len);
            for _ in 0..rows_len {
                let a = self.u64s(n)?;
                let b = self.u64s(n)?;
                rows.push(RlweCiphertext { a, b });
            }
            bsk.push(RgswCiphertext { rows, decomposer });
        }
        let input_dimension = self.u32()?;
        let output_dimension = self.u32()?;
        let decomposer = self.decomposer()?;
        let key_count = self.u32()?;
        if key_count != input_dimension * decomposer.levels {
            return Err(Error::Format("key-switching key has the wrong length".into()));
        }
        let keys = (0..key_count).map(|_| self.lwe(output_dimension)).collect::<Result<Vec<_>>>()?;
        let ksk = KeySwitchKey { input_dimension, output_dimension, decomposer, keys };
        Ok(BootstrapKey::from_parts(params, bsk, ksk)?)
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::Format(format!("{} trailing bytes", self.buf.len() - self.pos)));
        }
        Ok(())
    }
}

fn reader(bytes: &[u8]) -> Reader<'_> {
    Reader { buf: bytes, pos: 0 }
}

pub fn lwe_secret_key_to_bytes(key: &LweSecretKey, params: &FheParams) -> Vec<u8> {
    let mut w = Writer::default();
    w.header(Kind::LweSecretKey, params);
    w.bits(&key.coeffs);
    w.buf
}

pub fn lwe_secret_key_from_bytes(bytes: &[u8]) -> Result<(FheParams, LweSecretKey)> {
    let mut r = reader(bytes);
    let params = r.header(Kind::LweSecretKey)?;
    let key = LweSecretKey { coeffs: r.bits()? };
    r.finish()?;
    Ok((params, key))
}

pub fn ring_secret_key_to_bytes(key: &RingSecretKey, params: &FheParams) -> Vec<u8> {
    let mut w = Writer::default();
    w.header(Kind::RingSecretKey, params);
    w.bits(&key.coeffs);
    w.buf
}

pub fn ring_secret_key_from_bytes(bytes: &[u8]) -> Result<(FheParams, RingSecretKey)> {
    let mut r = reader(bytes);
    let params = r.header(Kind::RingSecretKey)?;
    let key = RingSecretKey { coeffs: r.bits()? };
    r.finish()?;
    Ok((params, key))
}

pub fn bootstrap_key_to_bytes(bsk: &BootstrapKey) -> Vec<u8> {
    let mut w = Writer::default();
    w.header(Kind::BootstrapKey, &bsk.params);
    w.bootstrap_key(bsk);
    w.buf
}

pub fn bootstrap_key_from_bytes(bytes: &[u8]) -> Result<BootstrapKey> {
    let mut r = reader(bytes);
    let params = r.header(Kind::BootstrapKey)?;
    let bsk = r.bootstrap_key(params)?;
    r.finish()?;
    Ok(bsk)
}

pub fn lwe_ciphertext_to_bytes(ct: &LweCiphertext, params: &FheParams) -> Vec<u8> {
    let mut w = Writer::default();
    w.header(Kind::LweCiphertext, params);
    w.u32(ct.dimension());
    w.lwe(ct);
    w.buf
}

pub fn lwe_ciphertext_from_bytes(bytes: &[u8]) -> Result<(FheParams, LweCiphertext)> {
    let mut r = reader(bytes);
    let params = r.header(Kind::LweCiphertext)?;
    let dim = r.u32()?;
    let ct = r.lwe(dim)?;
    r.finish()?;
    Ok((params, ct))
}

pub fn cipher_tensor_to_bytes(t: &CipherTensor, params: &FheParams) -> Vec<u8> {
    let mut w = Writer::default();
    w.header(Kind::CipherTensor, params);
    w.u32(t.shape.channels);
    w.u32(t.shape.height);
    w.u32(t.shape.width);
    w.u32(t.data.first().map_or(params.lwe_dimension, |c| c.dimension()));
    w.u32(t.data.len());
    for ct in &t.data {
        w.lwe(ct);
    }
    w.buf
}

pub fn cipher_tensor_from_bytes(bytes: &[u8]) -> Result<(FheParams, CipherTensor)> {
    let mut r = reader(bytes);
    let params = r.header(Kind::CipherTensor)?;
    let shape = Shape::new(r.u32()?, r.u32()?, r.u32()?);
    let dim = r.u32()?;
    let count = r.u32()?;
    if count != shape.numel() {
        return Err(Error::Format(format!("tensor holds {count} ciphertexts for shape {shape:?}")));
    }
    let data = (0..count).map(|_| r.lwe(dim)).collect::<Result<Vec<_>>>()?;
    r.finish()?;
    Ok((params, CipherTensor::new(shape, data)?))
}

pub fn ciphertexts_to_bytes(cts: &[LweCiphertext], params: &FheParams) -> Vec<u8> {
    let mut w = Writer::default();
    w.header(Kind::CiphertextList, params);
    w.u32(cts.first().map_or(params.lwe_dimension, |c| c.dimension()));
    w.u32(cts.len());
    for ct in cts {
        w.lwe(ct);
    }
    w.buf
}

pub fn ciphertexts_from_bytes(bytes: &[u8]) -> Result<(FheParams, Vec<LweCiphertext>)> {
    let mut r = reader(bytes);
    let params = r.header(Kind::CiphertextList)?;
    let dim = r.u32()?;
    let count = r.u32()?;
    let cts = (0..count).map(|_| r.lwe(dim)).collect::<Result<Vec<_>>>()?;
    r.finish()?;
    Ok((params, cts))
}

/// The parameter block of a client key records the first layer.
pub fn client_key_to_bytes(key: &ClientKey, params: &FheParams) -> Vec<u8> {
    let mut w = Writer::default();
    w.header(Kind::ClientKey, params);
    w.u32(key.moduli.len());
    for &p in &key.moduli {
        w.u64(p);
    }
    w.bits(&key.lwe.coeffs);
    w.buf
}

pub fn client_key_from_bytes(bytes: &[u8]) -> Result<(FheParams, ClientKey)> {
    let mut r = reader(bytes);
    let params = r.header(Kind::ClientKey)?;
    let count = r.u32()?;
    let moduli = (0..count).map(|_| r.u64()).collect::<Result<Vec<_>>>()?;
    if moduli.is_empty() || moduli.iter().any(|&p| p < 2 || p % 2 != 0) {
        return Err(Error::Format("client key moduli must be even and non-empty".into()));
    }
    let lwe = LweSecretKey { coeffs: r.bits()? };
    r.finish()?;
    if lwe.dimension() != params.lwe_dimension {
        return Err(Error::Format("client key dimension disagrees with its parameters".into()));
    }
    Ok((params, ClientKey { lwe, moduli, noise_std: params.noise_std }))
}

pub fn server_key_to_bytes(key: &ServerKey) -> Vec<u8> {
    let mut w = Writer::default();
    w.header(Kind::ServerKey, &key.keys[0].params);
    w.u32(key.keys.len());
    for bsk in &key.keys {
        w.params(&bsk.params);
        w.bootstrap_key(bsk);
    }
    w.u32(key.layer_key.len());
    for &i in &key.layer_key {
        w.u32(i);
    }
    w.buf
}

pub fn server_key_from_bytes(bytes: &[u8]) -> Result<ServerKey> {
    let mut r = reader(bytes);
    r.header(Kind::ServerKey)?;
    let count = r.u32()?;
    let mut keys = Vec::with_capacity(count.min(64));
    for _ in 0..count {
        let params = r.params()?;
        keys.push(r.bootstrap_key(params)?);
    }
    let layers = r.u32()?;
    let layer_key = (0..layers).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
    r.finish()?;
    if keys.is_empty() || layer_key.iter().any(|&i| i >= keys.len()) {
        return Err(Error::Format("server key layer index out of range".into()));
    }
    Ok(ServerKey { keys, layer_key })
}

/// Read the kind byte of an FDSN file without decoding the payload.
pub fn peek_kind(bytes: &[u8]) -> Result<Kind> {
    if bytes.len() < HEADER_LEN || bytes[..4] != MAGIC {
        return Err(Error::Format("not an FDSN file".into()));
    }
    Kind::from_u8(bytes[6])
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use spiketfhe_core::bootstrap::keygen;
    use spiketfhe_core::lwe::lwe_encrypt;
    use spiketfhe_core::network::network_keygen;
    use spiketfhe_core::random::rng_from_seed;

    fn small() -> FheParams {
        FheParams { lwe_dimension: 4, ring_dimension: 32, plaintext_modulus: 16, ..FheParams::toy() }
    }

    #[test]
    fn keys_round_trip_bit_exact() {
        let params = small();
        let (lwe, ring, bsk) = keygen(&params, 1).unwrap();
        let bytes = bootstrap_key_to_bytes(&bsk);
        let back = bootstrap_key_from_bytes(&bytes).unwrap();
        assert!(back == bsk);
        assert_eq!(bootstrap_key_to_bytes(&back), bytes);
        assert_eq!(lwe_secret_key_from_bytes(&lwe_secret_key_to_bytes(&lwe, &params)).unwrap(), (params, lwe));
        assert_eq!(ring_secret_key_from_bytes(&ring_secret_key_to_bytes(&ring, &params)).unwrap().1, ring);
    }

    #[test]
    fn header_layout() {
        let params = small();
        let (lwe, _, _) = keygen(&params, 1).unwrap();
        let bytes = lwe_secret_key_to_bytes(&lwe, &params);
        assert_eq!(&bytes[..4], b"FDSN");
        assert_eq!(u16::from_le_bytes([bytes[4], bytes[5]]), 1);
        assert_eq!(bytes[6], Kind::LweSecretKey as u8);
        assert_eq!(bytes.len(), HEADER_LEN + 4 + 4);
        assert_eq!(peek_kind(&bytes).unwrap(), Kind::LweSecretKey);
    }

    #[test]
    fn ciphertexts_and_network_keys_round_trip() {
        let params = small();
        let (client, server, _) = network_keygen(&[params, params.with_plaintext_modulus(32).unwrap()], 3).unwrap();
        let mut rng = rng_from_seed(4);
        let ct = lwe_encrypt(&client.lwe, 3, &params, &mut rng).unwrap();
        assert_eq!(lwe_ciphertext_from_bytes(&lwe_ciphertext_to_bytes(&ct, &params)).unwrap().1, ct);
        let t = CipherTensor::new(Shape::new(1, 1, 2), vec![ct.clone(), ct.clone()]).unwrap();
        assert_eq!(cipher_tensor_from_bytes(&cipher_tensor_to_bytes(&t, &params)).unwrap().1, t);
        assert_eq!(ciphertexts_from_bytes(&ciphertexts_to_bytes(&t.data, &params)).unwrap().1, t.data);
        assert_eq!(client_key_from_bytes(&client_key_to_bytes(&client, &params)).unwrap().1, client);
        let sk = server_key_to_bytes(&server);
        assert!(server_key_from_bytes(&sk).unwrap() == server);
    }

    #[test]
    fn rejects_corruption() {
        let params = small();
        let (lwe, _, bsk) = keygen(&params, 1).unwrap();
        let mut bytes = lwe_secret_key_to_bytes(&lwe, &params);
        assert!(bootstrap_key_from_bytes(&bytes).is_err());
        bytes[0] = b'X';
        assert!(lwe_secret_key_from_bytes(&bytes).is_err());
        let full = bootstrap_key_to_bytes(&bsk);
        assert!(bootstrap_key_from_bytes(&full[..full.len() - 1]).is_err());
        let mut extra = full.clone();
        extra.push(0);
        assert!(bootstrap_key_from_bytes(&extra).is_err());
    }
}
