"""Pseudonym registry: the local ledger mapping patient IDs to UUIDs.

The ledger is a plain CSV (`patient_id,pseudonym,created_at,note`) so it
opens in any spreadsheet tool. Patient identifiers never leave the
machine; outputs are named by the pseudonym only.
"""

import csv
import io
import os
import re
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from scopescrub.errors import IoError, RegistryLocked, ValidationError
from scopescrub.fsutil import atomic_write_text
from scopescrub.media.probe import probe

try:
    import fcntl
except ImportError:  # non-posix
    fcntl = None

CSV_HEADER = ["patient_id", "pseudonym", "created_at", "note"]

UUID4_RE = re.compile(
    r"^[0-9a-f]{8}-[0-9a-f]{4}-4[0-9a-f]{3}-[89ab][0-9a-f]{3}-[0-9a-f]{12}$")


def is_uuid4(text):
    """True iff text is a canonical lowercase UUIDv4 (version nibble 4,
    variant bits 10)."""
    return bool(UUID4_RE.match(text))


@dataclass(frozen=True)
class PseudonymRecord:
    patient_id: str
    pseudonym: str
    created_at: str
    note: str = ""


@dataclass
class VerificationReport:
    """Per-file de-identification checks."""

    path: str
    checks: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(self.checks.values()) and bool(self.checks)

    def to_dict(self):
        return {
            "path": self.path,
            "checks": dict(self.checks),
            "details": dict(self.details),
            "pass": self.passed,
        }


class _FileLock:
    """Advisory exclusive lock beside the ledger; no-op where unsupported."""

    def __init__(self, path):
        self.path = Path(path)
        self._fd = None

    def __enter__(self):
        if fcntl is None:
            return self
        self._fd = os.open(self.path, os.O_CREAT | os.O_RDWR, 0o600)
        try:
            fcntl.flock(self._fd, fcntl.LOCK_EX | fcntl.LOCK_NB)
        except OSError:
            os.close(self._fd)
            self._fd = None
            raise RegistryLocked(f"registry lock held: {self.path}")
        return self

    def __exit__(self, *exc):
        if self._fd is not None:
            fcntl.flock(self._fd, fcntl.LOCK_UN)
            os.close(self._fd)
            self._fd = None
        return False


class Registry:
    """Loads, queries, and atomically persists the pseudonym ledger."""

    def __init__(self, path):
        self.path = Path(path)
        self._mutex = threading.Lock()  # in-process writers
        self._by_patient = {}
        self._by_pseudonym = {}
        if self.path.exists():
            self._load()

    def _load(self):
        try:
            with open(self.path, newline="", encoding="utf-8") as fh:
                reader = csv.DictReader(fh)
                for row in reader:
                    rec = PseudonymRecord(
                        patient_id=row["patient_id"],
                        pseudonym=row["pseudonym"],
                        created_at=row.get("created_at", ""),
                        note=row.get("note", "") or "",
                    )
                    self._index(rec)
        except OSError as exc:
            raise IoError(f"cannot read registry {self.path}: {exc}") from exc

    def _index(self, rec):
        if rec.patient_id in self._by_patient or rec.pseudonym in self._by_pseudonym:
            raise ValidationError(
                f"registry breaks bijection near pseudonym {rec.pseudonym}")
        self._by_patient[rec.patient_id] = rec
        self._by_pseudonym[rec.pseudonym] = rec

    def __len__(self):
        return len(self._by_patient)

    @property
    def records(self):
        return list(self._by_patient.values())

    def _serialize(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(CSV_HEADER)
        for rec in self._by_patient.values():
            writer.writerow([rec.patient_id, rec.pseudonym, rec.created_at, rec.note])
        return buf.getvalue()

    def _persist(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        atomic_write_text(self.path, self._serialize(), mode=0o600)

    def assign_pseudonym(self, patient_id, note=""):
        """Return the record for patient_id, minting and persisting a fresh
        UUIDv4 on first sight. Idempotent."""
        if not patient_id:
            raise ValidationError("patient_id must be non-empty")
        existing = self._by_patient.get(patient_id)
        if existing is not None:
            return existing
        # threads serialize on the mutex; other processes on the file lock
        with self._mutex:
            existing = self._by_patient.get(patient_id)
            if existing is not None:
                return existing
            return self._mint(patient_id, note)

    def _mint(self, patient_id, note):
        with _FileLock(self.path.with_suffix(".lock")):
            pseudonym = str(uuid.uuid4())
            while pseudonym in self._by_pseudonym:
                pseudonym = str(uuid.uuid4())
            rec = PseudonymRecord(
                patient_id=patient_id,
                pseudonym=pseudonym,
                created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
                note=note,
            )
            self._index(rec)
            try:
                self._persist()
            except BaseException:
                del self._by_patient[rec.patient_id]
                del self._by_pseudonym[rec.pseudonym]
                raise
        return rec

    def lookup(self, pseudonym):
        """patient_id for a pseudonym, or None when unknown."""
        rec = self._by_pseudonym.get(pseudonym)
        return rec.patient_id if rec else None

    def has_pseudonym(self, pseudonym):
        return pseudonym in self._by_pseudonym


def verify_deidentified(path, registry, tool, expect_no_audio=True):
    """Machine checks that a pipeline output is de-identified.

    filename: stem is a canonical UUIDv4 registered in the ledger.
    metadata: no probe tags outside the technical allowlist.
    audio: no audio stream when the drop policy is in force.
    """
    path = Path(path)
    if not path.exists():
        raise IoError(f"no such file: {path}")
    report = VerificationReport(path=str(path))

    stem = path.stem
    uuid_ok = is_uuid4(stem)
    report.checks["filename_is_uuid4"] = uuid_ok
    report.checks["filename_in_registry"] = uuid_ok and registry.has_pseudonym(stem)

    info = probe(path, tool)
    leftover = info.disallowed_tags
    report.checks["metadata_clean"] = not leftover
    if leftover:
        report.details["disallowed_tags"] = sorted(leftover)

    if expect_no_audio:
        report.checks["no_audio_stream"] = not info.has_audio

    return report
