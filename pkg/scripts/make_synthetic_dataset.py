"""Build the frozen 53-row synthetic export at tests/data/synthetic_53.csv.

Deterministic (seeded); rerun only when the export schema changes. The
composition is fixed so the demographics arithmetic is known by
construction: 34/53 nationality pl_PL, 23/53 immigrants.
"""

from __future__ import annotations

import random
import sys
from pathlib import Path

from surveybot.scoring import DEFAULT_TIPI_KEY, score_tipi
from surveybot.storage import COLUMNS, records_to_csv

OUT = Path(__file__).resolve().parent.parent / "tests" / "data" / "synthetic_53.csv"

N = 53
N_POLISH = 34
N_IMMIGRANT = 23


def build_rows() -> list[dict]:
    rng = random.Random(20240515)
    rows: list[dict] = []
    locales = ["pl_PL"] * N_POLISH + ["uk_UA"] * 12 + ["en_GB"] * 4 + [""] * 3
    immigrant = ["1"] * N_IMMIGRANT + ["0"] * (N - N_IMMIGRANT)
    devices = ["computer"] * 28 + ["mobile phone"] * 24 + [""]
    genders = ["female"] * 25 + ["male"] * 24 + [""] * 4
    rng.shuffle(locales)
    rng.shuffle(immigrant)
    rng.shuffle(devices)
    rng.shuffle(genders)
    for i in range(N):
        tipi = [rng.randint(1, 7) for _ in range(10)]
        profile = score_tipi(tipi, DEFAULT_TIPI_KEY)
        employed = rng.random() < 0.6
        row = {column: "" for column in COLUMNS}
        row.update(
            {
                "Id": str(i + 1),
                "Fb_Id": f"synthetic-{i + 1}",
                "Locale": locales[i],
                "Hometown": rng.choice(["Warszawa", "Kyiv", "Kraków", "Lviv", ""]),
                "Gender": genders[i],
                "Record_created": "2022-05-15 12:00:00",
                "Jezyk": rng.choice(["pl", "uk", "en"]),
                "Age": str(rng.randint(18, 62)),
                "It_skils": str(rng.randint(1, 5)),
                "Immigrant": immigrant[i],
                "Device": devices[i],
                "DopKomp_czy_pracujesz": "yes" if employed else "no",
            }
        )
        for j, value in enumerate(tipi, start=1):
            row[f"TIPIPL_odp_{j}"] = str(value)
        for trait, column in {
            "extraversion": "TIPIPL_ekstarwersja",
            "agreeableness": "TIPIPL_ugodowosc",
            "conscientiousness": "TIPIPL_sumiennosc",
            "emotional_stability": "TIPIPL_stabilnosc",
            "openness": "TIPIPL_otwartosc",
        }.items():
            row[column] = str(round(profile.as_dict()[trait], 1))
        if employed:
            row["DopKomp_odp_num_1"] = "|".join(
                str(rng.randint(1, 5)) for _ in range(26)
            )
        for j in range(1, 11):
            row[f"Inter_odp_{j}"] = str(rng.randint(1, 5))
        rows.append(row)
    return rows


def main() -> int:
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(records_to_csv(build_rows()), encoding="utf-8")
    print(f"wrote {OUT}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
