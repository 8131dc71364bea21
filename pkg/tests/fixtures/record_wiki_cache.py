"""Regenerate tests/fixtures/wiki_cache by running the client against the fake wiki.

    python tests/fixtures/record_wiki_cache.py
"""

import shutil
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE.parent))

from wikifake import FakeSession  # noqa: E402

from netcorr import wiki  # noqa: E402

SEED_PAGE = "Network science"
MONTH = "2024-04"


def main():
    target = HERE / "wiki_cache"
    shutil.rmtree(target, ignore_errors=True)
    client = wiki.WikiClient(target, session=FakeSession(), rate=1000.0, sleep=lambda s: None)
    net = wiki.build_ego_minus_ego(client, SEED_PAGE, max_workers=1)
    wiki.fetch_metrics(client, net.members, MONTH, max_workers=1)
    # fetched_at is wall-clock; pin it so the fixture is reproducible
    import json

    for p in sorted(target.rglob("*.json")):
        entry = json.loads(p.read_text(encoding="utf-8"))
        entry["fetched_at"] = "2024-05-03T00:00:00Z"
        p.write_text(json.dumps(entry, sort_keys=True, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")
    print(f"recorded {client.network_requests} responses into {target}")


if __name__ == "__main__":
    main()
