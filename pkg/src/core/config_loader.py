"""
Loader konfiguracji z automatycznym uzupełnianiem wartości domyślnych.

Procedura jest sterowana danymi:
- data/defaults.yaml: wartości bazowe wszystkich ustawień (sekcje
  fit / split / simulation / output)
- plik użytkownika (--config): płaski słownik klucz-wartość w JSON
  (YAML też jest akceptowany)
- flagi CLI: nadpisują wszystko powyżej

Logika merge (uzupełniania defaults):
    1. Wczytaj defaults.yaml
    2. Spłaszcz wybrane sekcje do jednego słownika
    3. Nałóż plik użytkownika
    4. Nałóż flagi CLI (tylko te faktycznie podane, != None)

Przykład:
    defaults.yaml:
        split:
            subset_size: 30
            permutations: 20

    run.json:
        {"subset_size": 15}

    >>> loader = ConfigLoader("data/")
    >>> loader.effective_settings(["fit", "split"], "run.json", {"seed": 7})
    {..., 'subset_size': 15, 'permutations': 20, 'seed': 7, ...}

Walidacja zakresów należy do modeli pydantic w src/cli/config.py -
loader tylko składa słownik.
"""

from __future__ import annotations
from pathlib import Path
from typing import Dict, Any, Iterable, Optional
import copy
import json

import yaml

from .errors import InvalidArgumentError


# Domyślna lokalizacja data/ względem katalogu repozytorium
DEFAULT_DATA_PATH = Path(__file__).resolve().parent.parent.parent / "data"


class ConfigLoader:
    """
    Ładuje konfigurację z plików YAML/JSON z automatycznym merge defaults.

    Attributes:
        data_path (Path): Ścieżka do folderu data/
        _defaults (Dict): Cache wczytanych defaults

    Example:
        >>> loader = ConfigLoader()
        >>> loader.get_section("split")["permutations"]
        20
    """

    def __init__(self, data_path: Optional[str] = None):
        """
        Args:
            data_path: Ścieżka do folderu z defaults.yaml (None = data/ repo)
        """
        self.data_path = Path(data_path) if data_path else DEFAULT_DATA_PATH
        self._defaults: Optional[Dict] = None

    # ─────────────────────────────────────────────────────────────────────────
    # WCZYTYWANIE PLIKÓW
    # ─────────────────────────────────────────────────────────────────────────

    def _load_yaml(self, filename: str) -> Dict:
        """
        Wczytuje plik YAML z data_path.

        Raises:
            FileNotFoundError: Jeśli plik nie istnieje
        """
        filepath = self.data_path / filename
        with open(filepath, 'r', encoding='utf-8') as f:
            return yaml.safe_load(f) or {}

    def get_defaults(self) -> Dict:
        """
        Zwraca słownik z wartościami domyślnymi (cache).
        """
        if self._defaults is None:
            self._defaults = self._load_yaml("defaults.yaml")
        return self._defaults

    def get_section(self, name: str) -> Dict:
        """
        Zwraca kopię sekcji defaults.yaml.

        Raises:
            KeyError: Jeśli sekcja nie istnieje
        """
        defaults = self.get_defaults()
        if name not in defaults:
            raise KeyError(f"Section '{name}' not found in defaults.yaml")
        return copy.deepcopy(defaults[name])

    @staticmethod
    def load_user_config(path: str) -> Dict:
        """
        Wczytuje płaski plik konfiguracyjny użytkownika.

        Rozszerzenie .yaml/.yml -> YAML, wszystko inne -> JSON.

        Raises:
            InvalidArgumentError: Plik nie istnieje, nie parsuje się
                albo nie jest płaskim słownikiem
        """
        filepath = Path(path)
        if not filepath.is_file():
            raise InvalidArgumentError(f"Config file not found: {path}")

        text = filepath.read_text(encoding='utf-8')
        try:
            if filepath.suffix.lower() in (".yaml", ".yml"):
                data = yaml.safe_load(text) or {}
            else:
                data = json.loads(text) if text.strip() else {}
        except (yaml.YAMLError, json.JSONDecodeError) as e:
            raise InvalidArgumentError(f"Cannot parse config file {path}: {e}") from e

        if not isinstance(data, dict):
            raise InvalidArgumentError(f"Config file {path} must hold a key-value mapping")
        nested = [k for k, v in data.items() if isinstance(v, dict)]
        if nested:
            raise InvalidArgumentError(
                f"Config file {path} must be flat; nested keys: {nested}"
            )
        return data

    # ─────────────────────────────────────────────────────────────────────────
    # SKŁADANIE USTAWIEŃ
    # ─────────────────────────────────────────────────────────────────────────

    def effective_settings(
        self,
        sections: Iterable[str],
        config_path: Optional[str] = None,
        overrides: Optional[Dict[str, Any]] = None,
    ) -> Dict[str, Any]:
        """
        Składa efektywne ustawienia: defaults < plik < flagi.

        Args:
            sections: Sekcje defaults.yaml do spłaszczenia (kolejno)
            config_path: Opcjonalny plik użytkownika
            overrides: Flagi CLI; wartości None są pomijane

        Returns:
            Dict: Płaski słownik ustawień
        """
        result: Dict[str, Any] = {}
        for name in sections:
            result = self._deep_merge(result, self.get_section(name))

        if config_path:
            result = self._deep_merge(result, self.load_user_config(config_path))

        if overrides:
            given = {k: v for k, v in overrides.items() if v is not None}
            result = self._deep_merge(result, given)

        return result

    # ─────────────────────────────────────────────────────────────────────────
    # HELPERY
    # ─────────────────────────────────────────────────────────────────────────

    @staticmethod
    def _deep_merge(base: Dict, override: Dict) -> Dict:
        """
        Głęboko łączy dwa słowniki.

        Override nadpisuje wartości w base.
        Nested dicts są merge'owane rekurencyjnie.
        """
        result = copy.deepcopy(base)

        for key, value in override.items():
            if (
                key in result
                and isinstance(result[key], dict)
                and isinstance(value, dict)
            ):
                result[key] = ConfigLoader._deep_merge(result[key], value)
            else:
                result[key] = copy.deepcopy(value)

        return result

    def reload(self) -> None:
        """Czyści cache i wymusza ponowne wczytanie defaults.yaml."""
        self._defaults = None
