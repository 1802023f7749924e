//! Keys, addresses, statements, and signatures.
//!
//! Signing follows the XRPL secp256k1 convention: messages are digested with
//! SHA-512-half (the first 32 bytes of SHA-512) and signed with deterministic
//! RFC 6979 nonces, so the same key and message always produce the same DER
//! signature and whole ledgers are byte-reproducible across runs.

use k256::ecdsa::signature::hazmat::{PrehashSigner, PrehashVerifier};
use k256::ecdsa::{Signature as EcdsaSignature, SigningKey, VerifyingKey};
use ripemd::Ripemd160;
use sha2::{Digest, Sha256, Sha512};

use crate::canon::{CanonReader, CanonWriter};
use crate::chain::TxId;
use crate::error::CryptoError;

/// First 32 bytes of SHA-512, the XRPL signing digest.
pub fn sha512_half(data: &[u8]) -> [u8; 32] {
    let digest = Sha512::digest(data);
    let mut out = [0u8; 32];
    out.copy_from_slice(&digest[..32]);
    out
}

// ---------------------------------------------------------------------------
// Key pairs
// ---------------------------------------------------------------------------

/// A secp256k1 key pair held as the raw 32-byte scalar plus the compressed
/// 33-byte public point.
#[derive(Clone)]
pub struct KeyPair {
    secret: [u8; 32],
    public: [u8; 33],
}

impl KeyPair {
    /// Deterministically build a key pair from a 32-byte seed. The seed is
    /// used directly as the secret scalar and must be nonzero and below the
    /// curve order.
    pub fn generate(seed: [u8; 32]) -> Result<Self, CryptoError> {
        let signing = SigningKey::from_bytes(&seed.into()).map_err(|_| CryptoError::InvalidSeed)?;
        let point = signing.verifying_key().to_encoded_point(true);
        let mut public = [0u8; 33];
        public.copy_from_slice(point.as_bytes());
        Ok(Self { secret: seed, public })
    }

    pub fn public(&self) -> &[u8; 33] {
        &self.public
    }

    pub fn secret_bytes(&self) -> &[u8; 32] {
        &self.secret
    }

    pub fn address(&self) -> Address {
        // The public point came from a valid scalar, so derivation cannot fail.
        derive_address(&self.public).expect("valid public key")
    }

    /// Sign `message` over its SHA-512-half digest with a deterministic nonce.
    pub fn sign(&self, message: &[u8]) -> Signature {
        let signing = SigningKey::from_bytes(&self.secret.into()).expect("validated scalar");
        let digest = sha512_half(message);
        let sig: EcdsaSignature = signing.sign_prehash(&digest).expect("signing never fails");
        Signature { der: sig.to_der().as_bytes().to_vec() }
    }
}

impl std::fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "KeyPair({})", hex::encode(self.public))
    }
}

/// Sign a message with a raw secret scalar.
pub fn sign(secret: &[u8; 32], message: &[u8]) -> Result<Signature, CryptoError> {
    let signing = SigningKey::from_bytes(&(*secret).into()).map_err(|_| CryptoError::InvalidKey)?;
    let digest = sha512_half(message);
    let sig: EcdsaSignature = signing.sign_prehash(&digest).expect("signing never fails");
    Ok(Signature { der: sig.to_der().as_bytes().to_vec() })
}

/// True iff `sig` verifies for `public` over SHA-512-half(`message`).
/// Malformed keys or signatures simply return false.
pub fn verify(public: &[u8; 33], message: &[u8], sig: &Signature) -> bool {
    let Ok(key) = VerifyingKey::from_sec1_bytes(public) else {
        return false;
    };
    let Ok(parsed) = EcdsaSignature::from_der(&sig.der) else {
        return false;
    };
    let digest = sha512_half(message);
    key.verify_prehash(&digest, &parsed).is_ok()
}

// ---------------------------------------------------------------------------
// Addresses
// ---------------------------------------------------------------------------

/// An XRPL-style account address: base58check text over version byte 0x00
/// plus the 20-byte RIPEMD160(SHA256(public)) account id.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Address {
    text: String,
    account_id: [u8; 20],
}

impl Address {
    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn account_id(&self) -> &[u8; 20] {
        &self.account_id
    }

    /// Decode and checksum-validate an address string.
    pub fn from_text(text: &str) -> Result<Self, CryptoError> {
        let raw = bs58::decode(text)
            .with_alphabet(bs58::Alphabet::RIPPLE)
            .into_vec()
            .map_err(|e| CryptoError::BadAddress(e.to_string()))?;
        if raw.len() != 25 {
            return Err(CryptoError::BadAddress("payload is not 25 bytes".into()));
        }
        if raw[0] != 0x00 {
            return Err(CryptoError::BadAddress("bad version byte".into()));
        }
        let (payload, checksum) = raw.split_at(21);
        let expect = Sha256::digest(Sha256::digest(payload));
        if checksum != &expect[..4] {
            return Err(CryptoError::BadAddress("checksum mismatch".into()));
        }
        let mut account_id = [0u8; 20];
        account_id.copy_from_slice(&payload[1..]);
        Ok(Self { text: text.to_string(), account_id })
    }
}

impl std::fmt::Display for Address {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.text)
    }
}

impl std::fmt::Debug for Address {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.text)
    }
}

/// Derive the address for a compressed public key:
/// base58check(0x00 || RIPEMD160(SHA256(public))) with the XRPL alphabet and
/// a 4-byte double-SHA256 checksum.
pub fn derive_address(public: &[u8; 33]) -> Result<Address, CryptoError> {
    VerifyingKey::from_sec1_bytes(public).map_err(|_| CryptoError::InvalidPoint)?;
    let sha = Sha256::digest(public);
    let digest = Ripemd160::digest(sha);
    let mut account_id = [0u8; 20];
    account_id.copy_from_slice(&digest);

    let mut payload = Vec::with_capacity(25);
    payload.push(0x00);
    payload.extend_from_slice(&account_id);
    let checksum = Sha256::digest(Sha256::digest(&payload));
    payload.extend_from_slice(&checksum[..4]);

    let text = bs58::encode(payload)
        .with_alphabet(bs58::Alphabet::RIPPLE)
        .into_string();
    Ok(Address { text, account_id })
}

// ---------------------------------------------------------------------------
// Statements and attestations
// ---------------------------------------------------------------------------

/// A claim about a private attribute. The predicate is the disclosed text
/// ("farms more than 20 hectares of wheat"); the raw attribute value never
/// appears here — the privacy audit scans for leaks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Statement {
    pub subject: Address,
    pub issuer: Address,
    pub attribute_name: String,
    pub predicate: String,
    /// Unique per (issuer, subject) pair; replay protection.
    pub nonce: u64,
    /// Sidechain ledger index at statement creation.
    pub issued_at: u64,
}

impl Statement {
    /// Deterministic length-prefixed encoding; the digest both parties sign.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut w = CanonWriter::new();
        w.text(self.subject.text())
            .text(self.issuer.text())
            .text(&self.attribute_name)
            .text(&self.predicate)
            .uint(self.nonce)
            .uint(self.issued_at);
        w.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, CryptoError> {
        let mut r = CanonReader::new(bytes);
        let subject = Address::from_text(&r.text()?)?;
        let issuer = Address::from_text(&r.text()?)?;
        let attribute_name = r.text()?;
        let predicate = r.text()?;
        let nonce = r.uint()?;
        let issued_at = r.uint()?;
        r.expect_end()?;
        Ok(Self { subject, issuer, attribute_name, predicate, nonce, issued_at })
    }
}

/// A DER-encoded ECDSA signature.
#[derive(Clone, PartialEq, Eq)]
pub struct Signature {
    der: Vec<u8>,
}

impl Signature {
    pub fn from_der(der: Vec<u8>) -> Self {
        Self { der }
    }

    pub fn der(&self) -> &[u8] {
        &self.der
    }
}

impl std::fmt::Debug for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Signature({})", hex::encode(&self.der))
    }
}

/// The double-signed statement: the issuer's and the subject's signatures
/// over the same canonical statement bytes, plus the sidechain transaction
/// that anchors it once submitted.
#[derive(Clone, Debug)]
pub struct Attestation {
    pub statement: Statement,
    pub issuer_sig: Signature,
    pub user_sig: Signature,
    pub anchor_tx: Option<TxId>,
}

impl Attestation {
    /// Memo payload for the anchoring transaction. The anchor id itself is
    /// not part of the payload — it is the id of the carrying transaction.
    pub fn encode_memo(&self) -> Vec<u8> {
        let mut w = CanonWriter::new();
        w.chunk(&self.statement.canonical_bytes())
            .chunk(self.issuer_sig.der())
            .chunk(self.user_sig.der());
        w.finish()
    }

    pub fn decode_memo(bytes: &[u8]) -> Result<Self, CryptoError> {
        let mut r = CanonReader::new(bytes);
        let statement_bytes = r.chunk()?.to_vec();
        let issuer_sig = Signature::from_der(r.chunk()?.to_vec());
        let user_sig = Signature::from_der(r.chunk()?.to_vec());
        r.expect_end()?;
        let statement = Statement::decode(&statement_bytes)?;
        Ok(Self { statement, issuer_sig, user_sig, anchor_tx: None })
    }

    /// Check both signatures against the given on-record keys.
    /// Returns (issuer_sig_valid, user_sig_valid).
    pub fn verify(&self, issuer_public: &[u8; 33], subject_public: &[u8; 33]) -> (bool, bool) {
        let bytes = self.statement.canonical_bytes();
        (
            verify(issuer_public, &bytes, &self.issuer_sig),
            verify(subject_public, &bytes, &self.user_sig),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_statement() -> Statement {
        let subject = KeyPair::generate([0x11; 32]).unwrap().address();
        let issuer = KeyPair::generate([0x22; 32]).unwrap().address();
        Statement {
            subject,
            issuer,
            attribute_name: "wheat-hectares".into(),
            predicate: "owns more than 20 hectares of wheat".into(),
            nonce: 1,
            issued_at: 3,
        }
    }

    #[test]
    fn keypair_from_seed_is_deterministic() {
        let a = KeyPair::generate([0x01; 32]).unwrap();
        let b = KeyPair::generate([0x01; 32]).unwrap();
        assert_eq!(a.public(), b.public());
        assert_eq!(a.secret_bytes(), b.secret_bytes());
        assert!(a.public()[0] == 0x02 || a.public()[0] == 0x03);
    }

    #[test]
    fn zero_seed_rejected() {
        assert_eq!(KeyPair::generate([0x00; 32]).unwrap_err(), CryptoError::InvalidSeed);
    }

    #[test]
    fn seed_at_or_above_order_rejected() {
        // The secp256k1 group order itself is not a valid scalar.
        let order = hex::decode("fffffffffffffffffffffffffffffffebaaedce6af48a03bbfd25e8cd0364141")
            .unwrap();
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&order);
        assert_eq!(KeyPair::generate(seed).unwrap_err(), CryptoError::InvalidSeed);
        assert_eq!(KeyPair::generate([0xff; 32]).unwrap_err(), CryptoError::InvalidSeed);
    }

    /// Frozen vector from an independent script that chains pure-python
    /// secp256k1 -> SHA256 -> RIPEMD160 -> base58check over the XRPL alphabet.
    #[test]
    fn address_matches_independent_hash_chain_vector() {
        let kp = KeyPair::generate([0x01; 32]).unwrap();
        assert_eq!(
            hex::encode(kp.public()),
            "031b84c5567b126440995d3ed5aaba0565d71e1834604819ff9c17f5e9d5dd078f"
        );
        let addr = kp.address();
        assert_eq!(addr.text(), "rUaRcsApnVHudsdLD2mut2qCKWq6iLRT2D");
        assert_eq!(hex::encode(addr.account_id()), "79b000887626b294a914501a4cd226b58b235983");

        let kp2 = KeyPair::generate([0x02; 32]).unwrap();
        assert_eq!(kp2.address().text(), "r4VYvnjmi9JREsu1PZJQmJEJ6bQ6iPNSTP");
    }

    #[test]
    fn address_shape_and_round_trip() {
        let kp = KeyPair::generate([0x42; 32]).unwrap();
        let addr = kp.address();
        assert!(addr.text().starts_with('r'));
        assert!(addr.text().len() >= 25 && addr.text().len() <= 35);

        let decoded = Address::from_text(addr.text()).unwrap();
        assert_eq!(decoded.account_id(), addr.account_id());
        assert_eq!(decoded, addr);
    }

    #[test]
    fn corrupted_address_text_rejected() {
        let kp = KeyPair::generate([0x42; 32]).unwrap();
        let mut text: Vec<char> = kp.address().text().chars().collect();
        // swap two distinct characters to break the checksum
        let last = text.len() - 1;
        if text[1] != text[last] {
            text.swap(1, last);
        } else {
            text.swap(2, last);
        }
        let corrupted: String = text.into_iter().collect();
        assert!(Address::from_text(&corrupted).is_err());
    }

    #[test]
    fn invalid_point_rejected() {
        let mut bogus = [0u8; 33];
        bogus[0] = 0x05;
        assert_eq!(derive_address(&bogus).unwrap_err(), CryptoError::InvalidPoint);
    }

    #[test]
    fn sign_is_deterministic_and_verifies() {
        let kp = KeyPair::generate([0x07; 32]).unwrap();
        let msg = b"attestation payload";
        let sig1 = kp.sign(msg);
        let sig2 = kp.sign(msg);
        assert_eq!(sig1.der(), sig2.der());
        assert!(verify(kp.public(), msg, &sig1));
        assert!(!verify(kp.public(), b"attestation payloae", &sig1));
    }

    #[test]
    fn verify_rejects_wrong_key() {
        let kp = KeyPair::generate([0x07; 32]).unwrap();
        let other = KeyPair::generate([0x08; 32]).unwrap();
        let sig = kp.sign(b"m");
        assert!(!verify(other.public(), b"m", &sig));
    }

    #[test]
    fn verify_tolerates_garbage_inputs() {
        let kp = KeyPair::generate([0x07; 32]).unwrap();
        assert!(!verify(kp.public(), b"m", &Signature::from_der(vec![1, 2, 3])));
        let mut bad_key = *kp.public();
        bad_key[0] = 0x09;
        assert!(!verify(&bad_key, b"m", &kp.sign(b"m")));
    }

    #[test]
    fn statement_encoding_deterministic_and_nonce_sensitive() {
        let s = test_statement();
        let mut t = s.clone();
        assert_eq!(s.canonical_bytes(), t.canonical_bytes());
        t.nonce += 1;
        assert_ne!(s.canonical_bytes(), t.canonical_bytes());
    }

    #[test]
    fn statement_decode_round_trip() {
        let s = test_statement();
        let decoded = Statement::decode(&s.canonical_bytes()).unwrap();
        assert_eq!(decoded, s);
    }

    #[test]
    fn attestation_memo_round_trip_and_verify() {
        let subject_kp = KeyPair::generate([0x11; 32]).unwrap();
        let issuer_kp = KeyPair::generate([0x22; 32]).unwrap();
        let statement = test_statement();
        let bytes = statement.canonical_bytes();
        let att = Attestation {
            statement,
            issuer_sig: issuer_kp.sign(&bytes),
            user_sig: subject_kp.sign(&bytes),
            anchor_tx: None,
        };
        let memo = att.encode_memo();
        let decoded = Attestation::decode_memo(&memo).unwrap();
        assert_eq!(decoded.verify(issuer_kp.public(), subject_kp.public()), (true, true));
        // swapped keys must not verify
        assert_eq!(decoded.verify(subject_kp.public(), issuer_kp.public()), (false, false));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn sign_verify_round_trip(seed in any::<[u8; 32]>(), msg in proptest::collection::vec(any::<u8>(), 0..256)) {
                if let Ok(kp) = KeyPair::generate(seed) {
                    let sig = kp.sign(&msg);
                    prop_assert!(verify(kp.public(), &msg, &sig));
                    let mut other = msg.clone();
                    other.push(0x00);
                    prop_assert!(!verify(kp.public(), &other, &sig));
                }
            }

            #[test]
            fn distinct_keys_distinct_addresses(a in 1u64..u64::MAX, b in 1u64..u64::MAX) {
                prop_assume!(a != b);
                let mut sa = [0u8; 32];
                sa[24..].copy_from_slice(&a.to_be_bytes());
                let mut sb = [0u8; 32];
                sb[24..].copy_from_slice(&b.to_be_bytes());
                let addr_a = KeyPair::generate(sa).unwrap().address();
                let addr_b = KeyPair::generate(sb).unwrap().address();
                prop_assert_ne!(addr_a.text(), addr_b.text());
            }

            #[test]
            fn statement_encoding_injective_on_fields(
                nonce_a in any::<u64>(),
                nonce_b in any::<u64>(),
                pred_a in "[a-z ]{1,40}",
                pred_b in "[a-z ]{1,40}",
            ) {
                let base = test_statement();
                let mut a = base.clone();
                a.nonce = nonce_a;
                a.predicate = pred_a.clone();
                let mut b = base.clone();
                b.nonce = nonce_b;
                b.predicate = pred_b.clone();
                if a != b {
                    prop_assert_ne!(a.canonical_bytes(), b.canonical_bytes());
                }
            }
        }
    }
}
