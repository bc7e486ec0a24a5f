"""LLM judge client with record/replay transcripts.

Every LLM interaction in the toolkit goes through a JudgeClient so that
runs can be captured once and replayed byte-for-byte offline. A transcript
is a JSONL file of {"key": sha256(prompt), "response": ...} entries; in
replay mode no network call is ever made.

Live transport speaks a chat-completion style HTTP JSON API; the endpoint
and credentials come from MUSE_JUDGE_URL / MUSE_JUDGE_TOKEN unless given
explicitly.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path
from typing import Callable

__all__ = ["JudgeClient", "JudgeTransportError", "ReplayMissError", "prompt_key"]


class JudgeTransportError(Exception):
    """The judge could not be reached within the retry budget."""


class ReplayMissError(Exception):
    """A prompt was issued that the replay transcript does not contain."""


def prompt_key(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


class JudgeClient:
    """One judge with a fixed transport: replay, callable, or HTTP.

    * ``JudgeClient.replay(path)`` answers from a transcript only.
    * ``JudgeClient.from_callable(fn)`` wraps an in-process function,
      optionally recording a transcript for later replay.
    * ``JudgeClient.http(endpoint, model)`` talks to a chat-completion
      endpoint with a bounded retry budget.
    """

    def __init__(
        self,
        transport: Callable[[str], str] | None = None,
        transcript_path: str | Path | None = None,
        record: bool = False,
        model: str = "",
        retries: int = 3,
    ):
        self._transport = transport
        self._record = record
        self._transcript_path = Path(transcript_path) if transcript_path else None
        self.model = model
        self.retries = retries
        self.requests_made = 0
        self._replay: dict[str, str] = {}
        if self._transcript_path is not None and self._transcript_path.exists():
            for line in self._transcript_path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                entry = json.loads(line)
                self._replay[entry["key"]] = entry["response"]

    @classmethod
    def replay(cls, transcript_path: str | Path) -> "JudgeClient":
        client = cls(transport=None, transcript_path=transcript_path)
        if not client._replay:
            raise ReplayMissError(f"transcript {transcript_path} is empty or missing")
        return client

    @classmethod
    def from_callable(
        cls, fn: Callable[[str], str], transcript_path: str | Path | None = None
    ) -> "JudgeClient":
        return cls(transport=fn, transcript_path=transcript_path, record=transcript_path is not None)

    @classmethod
    def http(
        cls,
        endpoint: str | None = None,
        model: str | None = None,
        timeout: float = 60.0,
        retries: int = 3,
        transcript_path: str | Path | None = None,
    ) -> "JudgeClient":
        endpoint = endpoint or os.environ.get("MUSE_JUDGE_URL")
        if not endpoint:
            raise ValueError("no judge endpoint given and MUSE_JUDGE_URL is unset")
        model = model or os.environ.get("MUSE_JUDGE_MODEL", "")
        token = os.environ.get("MUSE_JUDGE_TOKEN", "")

        def transport(prompt: str) -> str:
            import requests

            headers = {"Content-Type": "application/json"}
            if token:
                headers["Authorization"] = f"Bearer {token}"
            payload = {
                "model": model,
                "messages": [{"role": "user", "content": prompt}],
            }
            resp = requests.post(endpoint, json=payload, headers=headers, timeout=timeout)
            resp.raise_for_status()
            data = resp.json()
            return data["choices"][0]["message"]["content"]

        return cls(
            transport=transport,
            transcript_path=transcript_path,
            record=transcript_path is not None,
            model=model,
            retries=retries,
        )

    @property
    def replay_only(self) -> bool:
        return self._transport is None

    def complete(self, prompt: str) -> str:
        """Answer a prompt, from the transcript when possible."""
        key = prompt_key(prompt)
        if key in self._replay:
            return self._replay[key]
        if self._transport is None:
            raise ReplayMissError(f"prompt {key[:12]}... not in transcript")
        last_error: Exception | None = None
        for _ in range(max(1, self.retries)):
            try:
                self.requests_made += 1
                response = self._transport(prompt)
                break
            except Exception as exc:  # noqa: BLE001 - transport errors vary by backend
                last_error = exc
        else:
            raise JudgeTransportError(f"judge failed after {self.retries} attempts: {last_error}")
        self._replay[key] = response
        if self._record and self._transcript_path is not None:
            with self._transcript_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps({"key": key, "response": response}, ensure_ascii=False) + "\n")
        return response
