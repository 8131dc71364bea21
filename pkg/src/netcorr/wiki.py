"""
Wikipedia EgoMinusEgo networks and page metrics.

All HTTP traffic goes through :class:`WikiClient`, which keeps an on-disk,
content-addressed cache of every response. A warm cache answers every
request without touching the network, so analyses can be rerun offline
and tests run against committed cache directories.

Cache layout::

    <cache_dir>/<first two hex chars>/<sha256 of request key>.json

where the request key is the endpoint URL plus the sorted query parameters
serialized as JSON. Each file holds ``key``, ``endpoint``, ``params``,
``status``, ``body`` and ``fetched_at``; files are never rewritten.
"""

from __future__ import annotations

import calendar
import hashlib
import json
import logging
import os
import random
import re
import tempfile
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from urllib.parse import quote

from .errors import FetchError, InputError, PageNotFoundError
from .graph import Graph, build_graph

logger = logging.getLogger(__name__)

API_URL = "https://en.wikipedia.org/w/api.php"
REST_URL = "https://en.wikipedia.org/w/rest.php/v1"
PAGEVIEWS_URL = "https://wikimedia.org/api/rest_v1/metrics/pageviews/per-article/en.wikipedia/all-access/user"
DEFAULT_USER_AGENT = "netcorr/0.1 (network autocorrelation toolkit; set --user-agent to your contact)"

# Non-article namespaces dropped from link lists.
EXCLUDED_PREFIXES = (
    "Talk:", "User:", "User talk:", "Wikipedia:", "Wikipedia talk:", "WP:", "File:", "File talk:",
    "Image:", "MediaWiki:", "MediaWiki talk:", "Template:", "Template talk:", "Help:", "Help talk:",
    "Category:", "Category talk:", "Portal:", "Portal talk:", "Draft:", "Draft talk:",
    "TimedText:", "TimedText talk:", "Module:", "Module talk:", "Special:", "Media:",
)

INFO_BATCH = 50
RETRY_STATUSES = (429, 500, 502, 503, 504)


def canonical_title(title: str) -> str:
    """Wiki title normal form: spaces for underscores, single spaces, first letter upper-case."""
    t = re.sub(r"\s+", " ", str(title).replace("_", " ")).strip()
    if not t:
        raise InputError("empty page title")
    return t[0].upper() + t[1:]


def title_label(title: str) -> str:
    """Whitespace-free node label for a title (underscore form)."""
    return canonical_title(title).replace(" ", "_")


def is_article(title: str) -> bool:
    return not any(title.startswith(p) for p in EXCLUDED_PREFIXES)


def request_key(endpoint: str, params: dict | None) -> str:
    return json.dumps({"endpoint": endpoint, "params": {k: str(v) for k, v in sorted((params or {}).items())}},
                      sort_keys=True, ensure_ascii=False)


class WikiCache:
    """Write-once response cache keyed by canonical request."""

    def __init__(self, root):
        self.root = Path(root)
        self._lock = threading.Lock()

    def path(self, key: str) -> Path:
        h = hashlib.sha256(key.encode("utf-8")).hexdigest()
        return self.root / h[:2] / f"{h}.json"

    def get(self, key: str) -> dict | None:
        p = self.path(key)
        if not p.exists():
            return None
        with open(p, encoding="utf-8") as fh:
            entry = json.load(fh)
        if entry.get("key") != key:
            raise FetchError(f"cache collision or corrupt entry at {p}")
        return entry

    def put(self, key: str, entry: dict) -> None:
        p = self.path(key)
        with self._lock:
            if p.exists():
                return
            p.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=p.parent, suffix=".tmp")
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(entry, fh, sort_keys=True, ensure_ascii=False, indent=1)
                fh.write("\n")
            os.replace(tmp, p)


class RateLimiter:
    """Spaces request starts at least ``1/rate`` seconds apart across threads."""

    def __init__(self, rate: float, clock=time.monotonic, sleep=time.sleep):
        if rate <= 0:
            raise InputError("rate must be positive")
        self.interval = 1.0 / rate
        self._clock = clock
        self._sleep = sleep
        self._next = 0.0
        self._lock = threading.Lock()

    def wait(self) -> None:
        with self._lock:
            now = self._clock()
            start = max(now, self._next)
            self._next = start + self.interval
        delay = start - now
        if delay > 0:
            self._sleep(delay)


class WikiClient:
    """Cached, rate-limited access to the MediaWiki action API, REST API and pageviews.

    ``session`` is anything with a ``requests``-style ``get(url, params=,
    headers=, timeout=)``; it defaults to a new :class:`requests.Session`.
    With ``offline=True`` a cache miss raises instead of fetching.
    """

    def __init__(self, cache_dir, user_agent: str = DEFAULT_USER_AGENT, session=None,
                 rate: float = 10.0, offline: bool = False, max_retries: int = 5,
                 seed: int = 0, timeout: float = 30.0, api_url: str = API_URL,
                 rest_url: str = REST_URL, pageviews_url: str = PAGEVIEWS_URL,
                 sleep=time.sleep):
        self.cache = WikiCache(cache_dir)
        self.user_agent = user_agent
        self._session = session
        self.limiter = RateLimiter(rate, sleep=sleep)
        self.offline = offline
        self.max_retries = max_retries
        self.timeout = timeout
        self.api_url = api_url
        self.rest_url = rest_url
        self.pageviews_url = pageviews_url
        self._sleep = sleep
        self._rng = random.Random(seed)
        self._rng_lock = threading.Lock()
        self._count_lock = threading.Lock()
        self.network_requests = 0

    @property
    def session(self):
        if self._session is None:
            import requests

            self._session = requests.Session()
        return self._session

    def _backoff(self, attempt: int, retry_after: str | None) -> float:
        if retry_after:
            try:
                return max(0.0, float(retry_after))
            except ValueError:
                pass
        with self._rng_lock:
            jitter = self._rng.random()
        return min(60.0, 2.0 ** attempt) * (0.5 + jitter)

    def get(self, endpoint: str, params: dict | None = None) -> tuple[int, object]:
        """Return ``(status, json body)`` for a GET, from cache when possible."""
        key = request_key(endpoint, params)
        hit = self.cache.get(key)
        if hit is not None:
            return hit["status"], hit["body"]
        if self.offline:
            raise FetchError(f"offline and not cached: {endpoint} {params}")
        status, body = self._fetch(endpoint, params)
        self.cache.put(key, {
            "key": key,
            "endpoint": endpoint,
            "params": {k: str(v) for k, v in sorted((params or {}).items())},
            "status": status,
            "body": body,
            "fetched_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        })
        return status, body

    def _fetch(self, endpoint: str, params: dict | None) -> tuple[int, object]:
        headers = {"User-Agent": self.user_agent, "Accept": "application/json"}
        last = None
        for attempt in range(self.max_retries + 1):
            self.limiter.wait()
            with self._count_lock:
                self.network_requests += 1
            try:
                resp = self.session.get(endpoint, params=params, headers=headers, timeout=self.timeout)
            except OSError as exc:
                last = f"{type(exc).__name__}: {exc}"
                self._sleep(self._backoff(attempt, None))
                continue
            status = resp.status_code
            if status in RETRY_STATUSES:
                last = f"HTTP {status}"
                self._sleep(self._backoff(attempt, resp.headers.get("Retry-After")))
                continue
            if status == 404:
                try:
                    return 404, resp.json()
                except ValueError:
                    return 404, None
            if status >= 400:
                raise FetchError(f"HTTP {status} from {endpoint}")
            body = resp.json()
            err = body.get("error") if isinstance(body, dict) else None
            if err:
                if err.get("code") in ("maxlag", "ratelimited"):
                    last = f"API {err.get('code')}"
                    self._sleep(self._backoff(attempt, resp.headers.get("Retry-After")))
                    continue
                raise FetchError(f"API error {err.get('code')}: {err.get('info')}")
            return status, body
        raise FetchError(f"giving up on {endpoint} after {self.max_retries + 1} attempts ({last})")

    def query(self, params: dict) -> list[dict]:
        """All batches of an action=query request, following ``continue`` to exhaustion."""
        base = {"action": "query", "format": "json", "formatversion": "2", **params}
        cont: dict = {}
        out = []
        while True:
            status, body = self.get(self.api_url, {**base, **cont})
            if status != 200:
                raise FetchError(f"HTTP {status} from action API")
            out.append(body)
            if "continue" not in body:
                return out
            cont = {k: v for k, v in body["continue"].items()}

    # -- endpoints -------------------------------------------------------

    def fetch_outlinks(self, title: str) -> list[str]:
        """Article-namespace titles linked from ``title``, sorted and unique."""
        title = canonical_title(title)
        links = set()
        for body in self.query({"prop": "links", "titles": title, "plnamespace": "0",
                                "pllimit": "max", "redirects": "1"}):
            for page in body.get("query", {}).get("pages", []):
                if page.get("missing") or page.get("invalid"):
                    raise PageNotFoundError(title)
                for link in page.get("links", []):
                    t = canonical_title(link["title"])
                    if is_article(t):
                        links.add(t)
        return sorted(links)

    def page_info(self, titles: list[str]) -> dict[str, dict]:
        """Info records per requested title: ``missing``, ``length``, ``watchers``."""
        titles = [canonical_title(t) for t in titles]
        out: dict[str, dict] = {}
        for i in range(0, len(titles), INFO_BATCH):
            batch = titles[i:i + INFO_BATCH]
            alias = {t: t for t in batch}
            for body in self.query({"prop": "info", "inprop": "watchers", "titles": "|".join(batch)}):
                q = body.get("query", {})
                for m in q.get("normalized", []) + q.get("redirects", []):
                    for src, tgt in list(alias.items()):
                        if tgt == m["from"]:
                            alias[src] = m["to"]
                by_title = {p["title"]: p for p in q.get("pages", [])}
                for src, tgt in alias.items():
                    if tgt in by_title:
                        out.setdefault(src, {}).update(by_title[tgt])
        return out

    def edit_count(self, title: str) -> int | None:
        t = quote(title_label(title), safe="")
        status, body = self.get(f"{self.rest_url}/page/{t}/history/counts/edits")
        if status == 404 or not isinstance(body, dict) or "count" not in body:
            return None
        return int(body["count"])

    def monthly_views(self, title: str, month: str) -> int:
        """Sum of daily user views over a calendar month ``YYYY-MM``; 0 when there is no data."""
        year, mon = parse_month(month)
        last = calendar.monthrange(year, mon)[1]
        t = quote(title_label(title), safe="")
        url = f"{self.pageviews_url}/{t}/daily/{year:04d}{mon:02d}01/{year:04d}{mon:02d}{last:02d}"
        status, body = self.get(url)
        if status == 404 or not isinstance(body, dict):
            return 0
        return int(sum(item.get("views", 0) for item in body.get("items", [])))


def parse_month(month: str) -> tuple[int, int]:
    m = re.fullmatch(r"(\d{4})-(\d{2})", str(month))
    if not m or not 1 <= int(m.group(2)) <= 12:
        raise InputError(f"month must look like YYYY-MM, got {month!r}")
    return int(m.group(1)), int(m.group(2))


@dataclass
class PageRecord:
    title: str
    views: int | None
    watchers: int | None
    length_bytes: int | None
    edits: int | None


@dataclass
class EgoNetwork:
    seed: str
    graph: Graph
    members: list[str]
    outlinks: dict[str, list[str]]
    dropped: list[str]
    failures: dict[str, str]


def _pool_map(fn, items, max_workers):
    if max_workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=max_workers) as ex:
        return list(ex.map(fn, items))


def build_ego_minus_ego(client: WikiClient, seed_title: str, max_workers: int = 4,
                        max_failure_fraction: float = 0.05) -> EgoNetwork:
    """EgoMinusEgo network of ``seed_title``.

    Members are the seed's article outlinks (the seed itself excluded, red
    links dropped). Two members are joined by an undirected edge when
    either links to the other. Node labels use the underscore title form.
    """
    seed = canonical_title(seed_title)
    candidates = [t for t in client.fetch_outlinks(seed) if t != seed]
    info = client.page_info(candidates)
    members = sorted(t for t in candidates if not info.get(t, {}).get("missing"))
    dropped = sorted(set(candidates) - set(members))
    if dropped:
        logger.info("dropped %d red link(s): %s", len(dropped), ", ".join(dropped[:10]))

    def fetch(t):
        try:
            return t, client.fetch_outlinks(t), None
        except (FetchError, InputError) as exc:
            return t, None, str(exc)

    outlinks: dict[str, list[str]] = {}
    failures: dict[str, str] = {}
    for t, links, err in _pool_map(fetch, members, max_workers):
        if err is None:
            outlinks[t] = links
        else:
            failures[t] = err
    if members and len(failures) > max_failure_fraction * len(members):
        raise FetchError(f"{len(failures)} of {len(members)} member pages failed to fetch")
    member_set = set(members)
    pairs = set()
    for u, links in outlinks.items():
        for v in links:
            if v in member_set and v != u:
                pairs.add((u, v) if u < v else (v, u))
    labels = {t: title_label(t) for t in members}
    g = build_graph([(labels[u], labels[v]) for u, v in sorted(pairs)],
                    nodes=[labels[t] for t in members]) if members else None
    if g is None:
        raise FetchError(f"{seed!r} has no article outlinks")
    return EgoNetwork(seed, g, members, outlinks, dropped, failures)


def fetch_metrics(client: WikiClient, titles: list[str], month: str,
                  max_workers: int = 4) -> list[PageRecord]:
    """Monthly views, watchers, length and edit count for each title.

    Watchers are ``None`` when the API suppresses small counts; any field
    whose request fails is ``None``.
    """
    parse_month(month)
    titles = [canonical_title(t) for t in titles]
    try:
        info = client.page_info(titles)
    except FetchError as exc:
        logger.warning("page info failed: %s", exc)
        info = {}

    def one(t):
        rec = info.get(t, {})
        try:
            views = client.monthly_views(t, month)
        except FetchError as exc:
            logger.warning("views for %r failed: %s", t, exc)
            views = None
        try:
            edits = client.edit_count(t)
        except FetchError as exc:
            logger.warning("edit count for %r failed: %s", t, exc)
            edits = None
        return PageRecord(t, views, rec.get("watchers"), rec.get("length"), edits)

    return _pool_map(one, titles, max_workers)


def write_dataset(net: EgoNetwork, records: list[PageRecord], out_dir) -> dict[str, Path]:
    """Write ``edges.txt``, ``metrics.csv`` and ``isolated.txt`` for the CLI.

    Edge lists cannot carry isolated nodes, so members without any link are
    listed in ``isolated.txt`` and left out of ``metrics.csv``.
    """
    import csv

    from .dataio import write_edge_list

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    g = net.graph
    connected = set(g.labels[i] for i in set(g.edges.ravel().tolist()))
    paths = {"edges": out / "edges.txt", "metrics": out / "metrics.csv", "isolated": out / "isolated.txt"}
    write_edge_list(g, paths["edges"])
    with open(paths["metrics"], "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "views", "watchers", "length", "edits"])
        for r in sorted(records, key=lambda r: title_label(r.title)):
            lab = title_label(r.title)
            if lab in connected:
                w.writerow([lab, *("" if v is None else v for v in (r.views, r.watchers, r.length_bytes, r.edits))])
    isolated = sorted(lab for lab in g.labels if lab not in connected)
    paths["isolated"].write_text("".join(f"{lab}\n" for lab in isolated), encoding="utf-8")
    return paths
