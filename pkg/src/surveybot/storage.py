"""Flattened per-respondent records in a single sqlite file.

One row per survey run. Column names and export order follow the upstream
logical data model this artifact mirrors, including its spellings
(TIPIPL_ekstarwersja, It_skils). The 26 competency answers live in a child
table and are serialized into the single DopKomp_odp_num_1 column on export;
an internal ``active`` flag (never exported) enforces one live run per user.

All fields are write-once: answers cannot be revised, matching observed
product behavior.
"""

from __future__ import annotations

import csv
import io
import sqlite3
import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .gateway.profiles import ProfileAttributes
from .scoring import BigFiveProfile

TIPI_ANSWER_COLUMNS = tuple(f"TIPIPL_odp_{i}" for i in range(1, 11))
SUS_ANSWER_COLUMNS = tuple(f"Inter_odp_{i}" for i in range(1, 11))
TRAIT_COLUMNS = {
    "extraversion": "TIPIPL_ekstarwersja",
    "agreeableness": "TIPIPL_ugodowosc",
    "conscientiousness": "TIPIPL_sumiennosc",
    "emotional_stability": "TIPIPL_stabilnosc",
    "openness": "TIPIPL_otwartosc",
}

# Export header, in upstream table order. The upstream table misprints one
# SUS row twice; each answer column appears here exactly once.
COLUMNS: tuple[str, ...] = (
    "Id",
    "Fb_Id",
    "First_name",
    "Last_name",
    "Locale",
    "Hometown",
    "Timezone",
    "Birthday",
    "Gender",
    *TIPI_ANSWER_COLUMNS,
    *TRAIT_COLUMNS.values(),
    "DopKomp_czy_pracujesz",
    "DopKomp_odp_num_1",
    *SUS_ANSWER_COLUMNS,
    "Record_created",
    "Jezyk",
    "Profile_pic",
    "Age",
    "It_skils",
    "Immigrant",
    "Device",
)

_PROFILE_COLUMNS = {
    "first_name": "First_name",
    "last_name": "Last_name",
    "locale": "Locale",
    "hometown": "Hometown",
    "timezone": "Timezone",
    "birthday": "Birthday",
    "gender": "Gender",
    "profile_pic": "Profile_pic",
}

_QUESTION_COLUMNS: dict[str, str] = {
    "employment": "DopKomp_czy_pracujesz",
    "meta.age": "Age",
    "meta.it_skills": "It_skils",
    "meta.immigrant": "Immigrant",
    "meta.device": "Device",
    **{f"tipi.{i}": f"TIPIPL_odp_{i}" for i in range(1, 11)},
    **{f"sus.{i}": f"Inter_odp_{i}" for i in range(1, 11)},
}

# canonical stored forms for non-numeric flags
_VALUE_CONVERTERS: dict[str, Callable[[int], object]] = {
    "employment": lambda v: "yes" if v == 1 else "no",
    "meta.immigrant": lambda v: 1 if v == 1 else 0,
    "meta.device": lambda v: "computer" if v == 1 else "mobile phone",
}

COMPETENCY_COUNT = 26
COMPETENCY_DELIMITER = "|"


class StorageError(Exception):
    """Persistence failure; code is one of
    DUPLICATE_ACTIVE_SESSION, FIELD_ALREADY_SET, UNKNOWN_FIELD, STORAGE."""

    def __init__(self, code: str, message: str) -> None:
        self.code = code
        super().__init__(f"{code}: {message}")


class RecordStore:
    """sqlite-backed store; every public method is atomic."""

    def __init__(self, path: str | Path = ":memory:") -> None:
        self.path = str(path)
        self._lock = threading.RLock()
        try:
            self._conn = sqlite3.connect(self.path, check_same_thread=False)
        except sqlite3.Error as exc:
            raise StorageError("STORAGE", f"cannot open {self.path}: {exc}") from exc
        self._conn.row_factory = sqlite3.Row
        self._create_schema()

    def close(self) -> None:
        with self._lock:
            self._conn.close()

    def _create_schema(self) -> None:
        answer_columns = ",\n".join(
            f'"{column}"' for column in COLUMNS if column not in ("Id",)
        )
        with self._lock, self._conn:
            self._conn.execute(
                f"""
                CREATE TABLE IF NOT EXISTS records (
                    "Id" INTEGER PRIMARY KEY AUTOINCREMENT,
                    {answer_columns},
                    active INTEGER NOT NULL DEFAULT 1
                )
                """
            )
            self._conn.execute(
                """
                CREATE TABLE IF NOT EXISTS competency_answers (
                    record_id INTEGER NOT NULL REFERENCES records("Id"),
                    position INTEGER NOT NULL,
                    value INTEGER NOT NULL,
                    UNIQUE (record_id, position)
                )
                """
            )

    # ---- record lifecycle -------------------------------------------

    def create_record(self, fb_id: str, attributes: ProfileAttributes) -> int:
        """Insert a fresh record; returns its Id."""
        if not fb_id:
            raise StorageError("STORAGE", "fb_id must be non-empty")
        with self._lock, self._conn:
            row = self._conn.execute(
                'SELECT "Id" FROM records WHERE "Fb_Id" = ? AND active = 1', (fb_id,)
            ).fetchone()
            if row is not None:
                raise StorageError(
                    "DUPLICATE_ACTIVE_SESSION", f"active record {row['Id']} for {fb_id!r}"
                )
            created = datetime.now(timezone.utc).strftime("%Y-%m-%d %H:%M:%S")
            columns = ['"Fb_Id"', '"Record_created"']
            values: list[object] = [fb_id, created]
            for attr, column in _PROFILE_COLUMNS.items():
                value = getattr(attributes, attr)
                if value is not None:
                    columns.append(f'"{column}"')
                    values.append(value)
            placeholders = ", ".join("?" for _ in values)
            cursor = self._conn.execute(
                f"INSERT INTO records ({', '.join(columns)}) VALUES ({placeholders})",
                values,
            )
            return int(cursor.lastrowid)

    def active_record_id(self, fb_id: str) -> int | None:
        with self._lock:
            row = self._conn.execute(
                'SELECT "Id" FROM records WHERE "Fb_Id" = ? AND active = 1', (fb_id,)
            ).fetchone()
            return int(row["Id"]) if row else None

    def finalize_record(self, record_id: int) -> None:
        with self._lock, self._conn:
            cursor = self._conn.execute(
                "UPDATE records SET active = 0 WHERE \"Id\" = ?", (record_id,)
            )
            if cursor.rowcount == 0:
                raise StorageError("STORAGE", f"no record {record_id}")

    # ---- write-once fields --------------------------------------------

    def _set_once(self, record_id: int, column: str, value: object) -> None:
        if column not in COLUMNS:
            raise StorageError("UNKNOWN_FIELD", column)
        with self._lock, self._conn:
            row = self._conn.execute(
                f'SELECT "{column}" AS current FROM records WHERE "Id" = ?', (record_id,)
            ).fetchone()
            if row is None:
                raise StorageError("STORAGE", f"no record {record_id}")
            if row["current"] is not None:
                raise StorageError(
                    "FIELD_ALREADY_SET", f"{column} already set on record {record_id}"
                )
            self._conn.execute(
                f'UPDATE records SET "{column}" = ? WHERE "Id" = ?', (value, record_id)
            )

    def save_answer(self, record_id: int, question_id: str, value: int) -> None:
        """Persist one answer; question ids map to fixed columns."""
        if question_id.startswith("comp."):
            position = int(question_id.split(".", 1)[1])
            if not 1 <= position <= COMPETENCY_COUNT:
                raise StorageError("UNKNOWN_FIELD", question_id)
            with self._lock, self._conn:
                exists = self._conn.execute(
                    'SELECT 1 FROM records WHERE "Id" = ?', (record_id,)
                ).fetchone()
                if exists is None:
                    raise StorageError("STORAGE", f"no record {record_id}")
                try:
                    self._conn.execute(
                        "INSERT INTO competency_answers (record_id, position, value)"
                        " VALUES (?, ?, ?)",
                        (record_id, position, value),
                    )
                except sqlite3.IntegrityError:
                    raise StorageError(
                        "FIELD_ALREADY_SET",
                        f"competency answer {position} already set on record {record_id}",
                    ) from None
            return
        column = _QUESTION_COLUMNS.get(question_id)
        if column is None:
            raise StorageError("UNKNOWN_FIELD", question_id)
        converter = _VALUE_CONVERTERS.get(question_id)
        self._set_once(record_id, column, converter(value) if converter else value)

    def set_language(self, record_id: int, locale: str) -> None:
        self._set_once(record_id, "Jezyk", locale)

    def save_scores(self, record_id: int, profile: BigFiveProfile) -> None:
        """Store the five trait scores, one decimal place each."""
        for trait, column in TRAIT_COLUMNS.items():
            self._set_once(record_id, column, round(getattr(profile, trait), 1))

    # ---- reads ----------------------------------------------------------

    def get_record(self, record_id: int) -> dict:
        """The record as a plain dict, competency answers as a list."""
        with self._lock:
            row = self._conn.execute(
                'SELECT * FROM records WHERE "Id" = ?', (record_id,)
            ).fetchone()
            if row is None:
                raise StorageError("STORAGE", f"no record {record_id}")
            answers = self._conn.execute(
                "SELECT position, value FROM competency_answers"
                " WHERE record_id = ? ORDER BY position",
                (record_id,),
            ).fetchall()
        record = {key: row[key] for key in row.keys() if key != "active"}
        record["competency_answers"] = [(r["position"], r["value"]) for r in answers]
        return record

    def record_ids(self) -> list[int]:
        with self._lock:
            rows = self._conn.execute('SELECT "Id" FROM records ORDER BY "Id"').fetchall()
        return [int(r["Id"]) for r in rows]

    # ---- export -----------------------------------------------------------

    def export_rows(self, fb_ids: Sequence[str] | None = None) -> list[dict[str, str]]:
        """Stringified export rows in column order; nulls become empty cells."""
        with self._lock:
            if fb_ids is None:
                rows = self._conn.execute('SELECT * FROM records ORDER BY "Id"').fetchall()
            else:
                marks = ", ".join("?" for _ in fb_ids)
                rows = self._conn.execute(
                    f'SELECT * FROM records WHERE "Fb_Id" IN ({marks}) ORDER BY "Id"',
                    tuple(fb_ids),
                ).fetchall()
            answers_by_record: dict[int, list[tuple[int, int]]] = {}
            for r in self._conn.execute(
                "SELECT record_id, position, value FROM competency_answers ORDER BY record_id, position"
            ):
                answers_by_record.setdefault(int(r["record_id"]), []).append(
                    (int(r["position"]), int(r["value"]))
                )
        exported = []
        for row in rows:
            record_id = int(row["Id"])
            cells: dict[str, str] = {}
            for column in COLUMNS:
                if column == "DopKomp_odp_num_1":
                    answers = answers_by_record.get(record_id, [])
                    cells[column] = COMPETENCY_DELIMITER.join(
                        str(value) for _, value in answers
                    )
                else:
                    value = row[column]
                    cells[column] = "" if value is None else str(value)
            exported.append(cells)
        return exported

    def export_csv(self, fb_ids: Sequence[str] | None = None) -> str:
        return records_to_csv(self.export_rows(fb_ids))


def records_to_csv(rows: Iterable[dict[str, str]]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({column: row.get(column, "") for column in COLUMNS})
    return buffer.getvalue()


def csv_to_records(text: str) -> list[dict[str, str]]:
    """Inverse of records_to_csv; exists for tests and the analytics CLI."""
    reader = csv.DictReader(io.StringIO(text))
    return [dict(row) for row in reader]


def split_competency_cell(cell: str) -> list[int]:
    if not cell:
        return []
    return [int(part) for part in cell.split(COMPETENCY_DELIMITER)]
