import hashlib

import pytest
from hypothesis import given, strategies as st

from os4ml.errors import CorruptionError, InvalidBucketError, NotFoundError
from os4ml.objectstore import BUCKETS, ObjectStore

# Published SHA-256 test vectors (FIPS 180-2 plus the empty string).
KNOWN_DIGESTS = {
    b"": "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855",
    b"abc": "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad",
    b"abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq":
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1",
    b"hello": "2cf24dba5fb0a30e26e83b2ac5b9e29e1b161e5c1fa7425e73043362938b9824",
}


@pytest.fixture()
def store(tmp_path):
    return ObjectStore(tmp_path / "objectstore")


def test_put_known_vectors(store):
    for data, digest in KNOWN_DIGESTS.items():
        artifact = store.put("datasets", data, "text/csv")
        assert artifact.digest == digest
        assert artifact.size_bytes == len(data)


def test_put_matches_reference_sha256(store):
    data = bytes(range(256)) * 3
    artifact = store.put("models", data, "application/octet-stream")
    assert artifact.digest == hashlib.sha256(data).hexdigest()


def test_put_is_idempotent(store):
    a1 = store.put("datasets", b"hello", "text/csv")
    count_after_first = len(list((store.root / "datasets").rglob("*")))
    a2 = store.put("datasets", b"hello", "text/csv")
    count_after_second = len(list((store.root / "datasets").rglob("*")))
    assert a1.digest == a2.digest
    assert a1.created_at == a2.created_at
    assert count_after_first == count_after_second


def test_unknown_bucket_rejected(store):
    with pytest.raises(InvalidBucketError):
        store.put("stuff", b"x", "text/plain")
    with pytest.raises(InvalidBucketError):
        store.list("stuff")


def test_get_round_trip(store):
    artifact = store.put("datasets", b"hello", "text/csv")
    assert store.get("datasets", artifact.digest) == b"hello"


def test_get_unknown_digest(store):
    with pytest.raises(NotFoundError):
        store.get("datasets", "0" * 64)


def test_get_malformed_digest(store):
    with pytest.raises(NotFoundError):
        store.get("datasets", "not-a-digest")


def test_tampered_blob_raises_corruption(store):
    artifact = store.put("datasets", b"important data", "text/csv")
    path = store.root / "datasets" / artifact.digest[:2] / artifact.digest
    path.write_bytes(b"tampered!")
    with pytest.raises(CorruptionError):
        store.get("datasets", artifact.digest)


def test_list_empty_bucket(store):
    assert store.list("models") == []


def test_list_counts_distinct_digests(store):
    store.put("artifacts", b"one", "t")
    store.put("artifacts", b"one", "t")
    store.put("artifacts", b"two", "t")
    listed = store.list("artifacts")
    assert len(listed) == 2


def test_list_sorted_by_created_then_digest(store):
    digests = [store.put("artifacts", bytes([i]), "t").digest for i in range(5)]
    listed = store.list("artifacts")
    assert listed == sorted(listed, key=lambda a: (a.created_at, a.digest))
    assert len(listed) == 5
    assert {a.digest for a in listed} == set(digests)


def test_delete_then_get_not_found(store):
    artifact = store.put("datasets", b"gone", "text/csv")
    store.delete("datasets", artifact.digest)
    with pytest.raises(NotFoundError):
        store.get("datasets", artifact.digest)


def test_delete_unknown_not_found(store):
    with pytest.raises(NotFoundError):
        store.delete("datasets", "f" * 64)


def test_delete_then_reput_restores(store):
    a1 = store.put("datasets", b"phoenix", "text/csv")
    store.delete("datasets", a1.digest)
    a2 = store.put("datasets", b"phoenix", "text/csv")
    assert a2.digest == a1.digest
    assert store.get("datasets", a2.digest) == b"phoenix"


def test_buckets_are_isolated(store):
    artifact = store.put("datasets", b"data", "text/csv")
    with pytest.raises(NotFoundError):
        store.get("models", artifact.digest)


@given(st.binary(max_size=4096))
def test_round_trip_identity_property(tmp_path_factory, data):
    store = ObjectStore(tmp_path_factory.mktemp("objstore"))
    artifact = store.put("artifacts", data, "application/octet-stream")
    assert store.get("artifacts", artifact.digest) == data
    assert artifact.digest == hashlib.sha256(data).hexdigest()


def test_distinct_content_distinct_digests(store):
    blobs = [bytes([i, i + 1]) for i in range(50)]
    digests = {store.put("artifacts", b, "t").digest for b in blobs}
    assert len(digests) == len(blobs)


def test_bucket_names():
    assert BUCKETS == ("datasets", "models", "artifacts")


def test_concurrent_identical_puts_converge(store):
    import threading

    data = b"contended blob " * 100
    results = []
    errors = []

    def worker():
        try:
            results.append(store.put("artifacts", data, "t").digest)
        except Exception as exc:  # noqa: BLE001
            errors.append(exc)

    threads = [threading.Thread(target=worker) for _ in range(16)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
    assert len(set(results)) == 1
    assert store.get("artifacts", results[0]) == data
    assert len(store.list("artifacts")) == 1
