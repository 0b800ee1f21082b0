from extremepy.core.conf import ExtremePyConf


try:
    config: ExtremePyConf = ExtremePyConf.load_from_config_file()
except FileNotFoundError:
    # Numerical defaults are usable without a config file
    config = ExtremePyConf()


from extremepy.logging import LOG  # noqa
