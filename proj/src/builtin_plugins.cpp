#include "tempoframe/interpret.hpp"
#include "tempoframe/plugin.hpp"
#include "tempoframe/prediction.hpp"
#include "tempoframe/preprocessing.hpp"
#include "tempoframe/survival.hpp"
#include "tempoframe/treatment.hpp"

namespace tempoframe {

void register_builtin_plugins(Registry& registry) {
  preprocessing::register_plugins(registry);
  prediction::register_plugins(registry);
  survival::register_plugins(registry);
  treatment::register_plugins(registry);
  interpret::register_plugins(registry);
}

}  // namespace tempoframe
