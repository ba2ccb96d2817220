"""Process-wide output components: configured once, created on first use"""


class ConfiguredSingleton:
    """One instance per subclass; options set by configure() apply when it is created"""

    _instance = None
    _options = None

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        cls._instance = None
        cls._options = None

    @classmethod
    def configure(cls, **options):
        if cls._instance is not None:
            raise RuntimeError(f"{cls.__name__} already initialized, cannot configure")
        cls._options = options

    @classmethod
    def is_initialized(cls) -> bool:
        return cls._instance is not None

    def __new__(cls):
        if cls._instance is None:
            instance = super().__new__(cls)
            instance._setup(**(cls._options or {}))
            cls._instance = instance
        return cls._instance

    def _setup(self, **options):
        raise NotImplementedError


class LazyProxy:
    """Module-level handle that builds its target on first attribute access"""

    def __init__(self, factory):
        self._factory = factory
        self._target = None

    def __getattr__(self, name):
        if self._target is None:
            self._target = self._factory()
        return getattr(self._target, name)
