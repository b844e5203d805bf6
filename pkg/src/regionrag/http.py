"""Minimal JSON-over-HTTP plumbing for OpenAI-compatible endpoints."""

from __future__ import annotations

import os

import httpx

from regionrag.errors import TransportError

_RETRYABLE_STATUS = {408, 409, 425, 429, 500, 502, 503, 504}


def auth_headers(api_key_env: str | None) -> dict[str, str]:
    """Bearer header from the named environment variable; no header when unset."""
    if not api_key_env:
        return {}
    key = os.environ.get(api_key_env)
    return {"Authorization": f"Bearer {key}"} if key else {}


def post_json(
    client: httpx.Client,
    url: str,
    payload: dict,
    api_key_env: str | None = None,
    timeout: float = 60.0,
) -> dict:
    try:
        resp = client.post(url, json=payload, headers=auth_headers(api_key_env), timeout=timeout)
    except httpx.HTTPError as exc:
        raise TransportError(f"POST {url} failed: {exc}", status=None, retryable=True) from exc
    if resp.status_code >= 400:
        raise TransportError(
            f"POST {url} returned HTTP {resp.status_code}: {resp.text[:200]}",
            status=resp.status_code,
            retryable=resp.status_code in _RETRYABLE_STATUS,
        )
    try:
        return resp.json()
    except ValueError as exc:
        raise TransportError(
            f"POST {url} returned non-JSON body", status=resp.status_code, retryable=False
        ) from exc
