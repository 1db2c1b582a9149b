"""
Newform Fetcher Module

This module downloads weight-2 trivial-character newform orbits (dimension,
Atkin-Lehner signs, Hecke characteristic polynomials) from an LMFDB-style
JSON API, caches them per level and aggregates the cache into a
newforms.json file readable by load_dataset.
"""

import fcntl
import json
import logging
import os
from contextlib import contextmanager
from typing import Any, Dict, Iterable, Iterator, List, Optional
from urllib.parse import urlencode, urljoin

import requests
from requests.adapters import HTTPAdapter
from sympy import Poly, divisors, primerange, symbols
from tqdm import tqdm
from urllib3.util.retry import Retry

from .arithmetic import Level
from .exceptions import DatasetError, FetchError
from .modform_data import NEWFORMS_FILE, SCHEMA_VERSION, dumps, parse_newforms

logger = logging.getLogger(__name__)

RETRY_STATUSES = (429, 500, 502, 503, 504)
LOCK_FILE = ".lock"

_t = symbols("t")


def cache_file(cache_dir: str, level: int) -> str:
    return os.path.join(cache_dir, f"level_{level}.json")


def divisor_closure(levels: Iterable[int]) -> List[int]:
    """All divisors of the requested levels, sorted."""
    closure = set()
    for n in levels:
        if n < 1:
            raise FetchError(f"level must be positive, got {n}")
        closure.update(int(m) for m in divisors(n))
    return sorted(closure)


def parse_levels(text: str) -> List[int]:
    """Parse "A..B" or a comma-separated list of levels."""
    text = text.strip()
    try:
        if ".." in text:
            start, end = (int(part) for part in text.split("..", 1))
            return list(range(start, end + 1))
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise FetchError(f"cannot parse levels {text!r}; use A..B or a comma list")


def charpoly_coefficients(value: Any) -> List[int]:
    """
    Coefficients (constant term first) of a Hecke characteristic polynomial.

    Accepts a flat coefficient list or a factorization [[coefficients, exponent], ...].
    """
    if isinstance(value, list) and value and all(isinstance(c, int) for c in value):
        return list(value)
    if isinstance(value, list) and value:
        product = Poly(1, _t)
        for factor in value:
            if not (isinstance(factor, list) and len(factor) == 2 and isinstance(factor[1], int)):
                raise FetchError(f"malformed charpoly factor {factor!r}")
            coeffs, exponent = factor
            product *= Poly(list(reversed(coeffs)), _t) ** exponent
        return [int(c) for c in reversed(product.all_coeffs())]
    raise FetchError(f"malformed charpoly {value!r}")


@contextmanager
def cache_lock(cache_dir: str) -> Iterator[None]:
    """Exclusive lock on the cache directory for the duration of a write."""
    os.makedirs(cache_dir, exist_ok=True)
    with open(os.path.join(cache_dir, LOCK_FILE), "w") as handle:
        fcntl.flock(handle.fileno(), fcntl.LOCK_EX)
        try:
            yield
        finally:
            fcntl.flock(handle.fileno(), fcntl.LOCK_UN)


def _write_if_changed(path: str, text: str) -> bool:
    if os.path.exists(path):
        with open(path, "r", encoding="utf-8") as f:
            if f.read() == text:
                return False
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as f:
        f.write(text)
    os.replace(tmp, path)
    return True


class NewformFetcher:
    """Fetches and caches newform orbit data per level."""

    def __init__(self, config: Optional[Dict[str, Any]] = None, session: Optional[requests.Session] = None):
        """
        Initialize the NewformFetcher.

        Args:
            config: The "fetch" configuration section
            session: HTTP session to use (a retrying session is built when None)
        """
        config = config or {}
        self.endpoint = config.get("endpoint", "https://www.lmfdb.org/api").rstrip("/")
        self.cache_dir = config.get("cache_dir", "data/cache")
        self.newform_table = config.get("newform_table", "mf_newforms")
        self.hecke_table = config.get("hecke_table", "mf_hecke_charpolys")
        self.charpoly_field = config.get("charpoly_field", "charpoly_factorization")
        self.int_prefix = config.get("int_prefix", "i")
        self.max_prime = config.get("max_prime", 30)
        self.timeout = config.get("timeout", 30)
        self.page_size = config.get("page_size", 100)
        self.session = session or self._build_session(config.get("retries", 5), config.get("backoff_factor", 0.5))

    @staticmethod
    def _build_session(retries: int, backoff_factor: float) -> requests.Session:
        retry = Retry(total=retries, backoff_factor=backoff_factor,
                      status_forcelist=RETRY_STATUSES, allowed_methods=frozenset(["GET"]))
        session = requests.Session()
        adapter = HTTPAdapter(max_retries=retry)
        session.mount("https://", adapter)
        session.mount("http://", adapter)
        return session

    def _int(self, value: int) -> str:
        return f"{self.int_prefix}{value}"

    def _query(self, table: str, params: Dict[str, str], fields: List[str]) -> List[Dict[str, Any]]:
        """All rows of a paginated table query."""
        query = dict(params, _format="json", _fields=",".join(fields), _limit=str(self.page_size))
        url: Optional[str] = f"{self.endpoint}/{table}/?{urlencode(query)}"
        rows: List[Dict[str, Any]] = []
        while url:
            logger.debug("GET %s", url)
            try:
                response = self.session.get(url, timeout=self.timeout)
                response.raise_for_status()
                payload = response.json()
            except (requests.RequestException, ValueError) as exc:
                raise FetchError(f"request to {table} failed: {exc}")
            if not isinstance(payload, dict) or not isinstance(payload.get("data"), list):
                raise FetchError(f"malformed response from {table}: missing data list")
            rows.extend(payload["data"])
            next_url = payload.get("next")
            url = urljoin(url, next_url) if next_url else None
        return rows

    def fetch_level(self, level: int) -> List[Dict[str, Any]]:
        """
        Download the newform orbits of one level.

        Returns:
            Orbit dicts in the dataset schema, sorted by label
        """
        newforms = self._query(
            self.newform_table,
            {"level": self._int(level), "weight": self._int(2), "char_order": self._int(1)},
            ["label", "level", "dim", "atkin_lehner_eigenvals", "hecke_orbit_code"],
        )
        prime_powers = {p: p ** e for p, e in Level(level).factorization.items()}
        primes = [int(p) for p in primerange(2, self.max_prime + 1) if level % p]

        orbits = []
        for row in newforms:
            try:
                label, dim, code = row["label"], int(row["dim"]), row["hecke_orbit_code"]
                signs = {}
                for p, sign in row.get("atkin_lehner_eigenvals") or []:
                    signs[str(prime_powers[int(p)])] = int(sign)
            except (KeyError, TypeError, ValueError) as exc:
                raise FetchError(f"malformed newform row at level {level}: {exc}")

            hecke = {}
            charpolys = self._query(self.hecke_table, {"hecke_orbit_code": self._int(code)},
                                    ["hecke_orbit_code", "p", self.charpoly_field])
            for entry in charpolys:
                p = int(entry.get("p", 0))
                if p in primes:
                    hecke[str(p)] = charpoly_coefficients(entry.get(self.charpoly_field))
            orbits.append({"label": label, "level": level, "dim": dim, "al": signs, "hecke": hecke})
        orbits.sort(key=lambda o: o["label"])
        return orbits

    def cached_levels(self) -> List[int]:
        if not os.path.isdir(self.cache_dir):
            return []
        levels = []
        for name in os.listdir(self.cache_dir):
            if name.startswith("level_") and name.endswith(".json"):
                try:
                    levels.append(int(name[len("level_"):-len(".json")]))
                except ValueError:
                    continue
        return sorted(levels)

    def uncached(self, levels: Iterable[int]) -> List[int]:
        return [m for m in levels if not os.path.exists(cache_file(self.cache_dir, m))]

    def _read_level(self, level: int) -> Dict[str, Any]:
        with open(cache_file(self.cache_dir, level), "r", encoding="utf-8") as f:
            return json.load(f)

    def aggregate(self) -> str:
        """Rebuild newforms.json from every cached level; returns its path."""
        levels = self.cached_levels()
        orbits: List[Dict[str, Any]] = []
        for level in levels:
            orbits.extend(self._read_level(level)["orbits"])
        document = {"schema_version": SCHEMA_VERSION, "levels": levels, "orbits": orbits}
        path = os.path.join(self.cache_dir, NEWFORMS_FILE)
        try:
            parse_newforms(document, path)
        except DatasetError as exc:
            raise FetchError(f"cached newform data does not match the dataset schema: {exc}")
        if _write_if_changed(path, dumps(document)):
            logger.info("Wrote %s (%d levels, %d orbits)", path, len(levels), len(orbits))
        return path

    def fetch_newforms(self, levels: Iterable[int], offline: bool = False, progress: bool = False) -> str:
        """
        Make sure every divisor of the requested levels is cached.

        Args:
            levels: Requested levels
            offline: Serve from cache only
            progress: Show a tqdm bar over levels

        Returns:
            Path of the aggregated newforms.json

        Raises:
            FetchError: for missing levels offline or malformed upstream data;
                after a partial fetch it lists the levels still uncached
        """
        wanted = divisor_closure(levels)
        if offline:
            missing = self.uncached(wanted)
            if missing:
                raise FetchError("offline and not cached", missing)

        with cache_lock(self.cache_dir):
            missing = self.uncached(wanted)
            for i, level in enumerate(tqdm(missing, desc="Fetching levels", disable=not progress)):
                try:
                    orbits = self.fetch_level(level)
                except FetchError as exc:
                    logger.error("Fetch stopped at level %d; %d levels left", level, len(missing) - i)
                    raise FetchError(str(exc), missing[i:]) from exc
                document = {"schema_version": SCHEMA_VERSION, "level": level, "orbits": orbits}
                _write_if_changed(cache_file(self.cache_dir, level), dumps(document))
                logger.info("Cached level %d (%d orbits)", level, len(orbits))
            return self.aggregate()


def fetch_newforms(levels: Iterable[int], endpoint: Optional[str] = None, cache: Optional[str] = None,
                   offline: bool = False, config: Optional[Dict[str, Any]] = None) -> str:
    """Fetch newform data for levels and their divisors; returns the aggregate path."""
    config = dict(config or {})
    if endpoint:
        config["endpoint"] = endpoint
    if cache:
        config["cache_dir"] = cache
    return NewformFetcher(config).fetch_newforms(levels, offline=offline)
