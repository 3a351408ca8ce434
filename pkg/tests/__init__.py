# AutoTramite Python MVP - Tests