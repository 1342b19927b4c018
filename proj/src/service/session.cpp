#include <algorithm>

#include "deskservo/server.hpp"

namespace deskservo::service {

std::string_view to_string(SessionMode mode) {
  switch (mode) {
    case SessionMode::Idle: return "IDLE";
    case SessionMode::CollectSpins: return "COLLECT_SPINS";
    case SessionMode::Wander: return "WANDER";
    case SessionMode::Autonomy: return "AUTONOMY";
  }
  return "IDLE";
}

std::optional<SessionMode> session_mode_from_string(std::string_view name) {
  for (auto m : {SessionMode::Idle, SessionMode::CollectSpins, SessionMode::Wander,
                 SessionMode::Autonomy}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

sim::Pose2D wander_start_pose(const CameraModel& cam, const Geofence& fence) {
  // Ground point under the vertex centroid, which is inside for convex fences.
  ImagePoint c{0.0, 0.0};
  for (const auto& v : fence.vertices()) c = c + v;
  c = (1.0 / static_cast<double>(fence.vertices().size())) * c;
  if (!contains(fence, c))
    throw Error(ErrorCode::InvalidGeometry, "geofence centroid lies outside the fence");
  return {cam.unproject(c), Angle(0.3)};
}

std::uint64_t wander_seed(const Config& config) { return config.scenario.seed + 1; }

sim::Pose2D spin_start_pose(const CameraModel& cam) {
  return {cam.unproject({cam.width() * 0.5, cam.height() * 0.5}), Angle(kPi / 2)};
}

namespace {

json points_json(const std::vector<ImagePoint>& pts) {
  json out = json::array();
  for (const auto& p : pts) out.push_back({p.u, p.v});
  return out;
}

json box_json(const std::optional<sim::BoundingBox>& box) {
  if (!box) return nullptr;
  return {{"u", box->center.u}, {"v", box->center.v}, {"w", box->width}, {"h", box->height}};
}

json tick_summary(const PipelineTick& t) {
  return {{"t", t.t},
          {"frame", t.frame},
          {"box", box_json(t.box)},
          {"estimate", t.estimate ? json{{"u", t.estimate->position.u},
                                         {"v", t.estimate->position.v},
                                         {"heading", t.estimate->heading.radians()}}
                                  : json(nullptr)},
          {"command", t.command_present ? json{{"v", t.v}, {"omega", t.omega}} : json(nullptr)},
          {"controller_mode", std::string(control::to_string(t.mode))},
          {"segment", t.segment},
          {"image_cross_track", t.image_cross_track}};
}

}  // namespace

json snapshot_to_json(const SessionSnapshot& s) {
  json j;
  j["mode"] = std::string(to_string(s.mode));
  j["tick"] = s.tick;
  j["time"] = s.time;
  j["last_tick"] = s.last_tick ? tick_summary(*s.last_tick) : json(nullptr);
  j["geofence"] = s.fence ? points_json(*s.fence) : json(nullptr);
  j["track"] = s.track ? points_json(*s.track) : json(nullptr);
  j["wander_frames"] = s.wander_frames;
  j["labels"] = s.labels;
  j["calibrated_spin_speed"] = s.calibrated_spin_speed ? json(*s.calibrated_spin_speed) : json(nullptr);
  j["runs"] = s.runs;
  j["model_loaded"] = s.model_loaded;
  j["last_error"] = s.last_error;
  return j;
}

json telemetry_to_json(const PipelineTick& tick, std::uint64_t run_id) {
  json j = tick_summary(tick);
  j["run"] = run_id;
  return j;
}

Session::Session(Config config, std::optional<estimator::Model> model)
    : config_(std::move(config)), world_(config_.scenario) {
  if (model) learned_ = std::make_shared<LearnedEstimator>(std::move(*model));
  if (config_.fence) {
    fence_ = Geofence(*config_.fence);
    pending_fence_ = true;
  }
  if (config_.track) {
    track_ = ImageTrack(*config_.track);
    pending_track_ = true;
  }
  world_.reset(spin_start_pose(world_.camera()), config_.scenario.seed);
  publish(nullptr);
}

Session::~Session() = default;

void Session::submit_geofence(Geofence fence) {
  std::lock_guard lock(queue_mutex_);
  queue_.push_back(SetFence{std::move(fence)});
  pending_fence_ = true;
}

void Session::submit_track(ImageTrack track) {
  std::lock_guard lock(queue_mutex_);
  queue_.push_back(SetTrack{std::move(track)});
  pending_track_ = true;
}

ModeRequestResult Session::request_mode(SessionMode mode, const json& params) {
  std::lock_guard lock(queue_mutex_);
  if (mode == SessionMode::Wander && !pending_fence_) return ModeRequestResult::MissingGeofence;
  if (mode == SessionMode::Autonomy) {
    if (!pending_track_) return ModeRequestResult::MissingTrack;
    const bool bypass = params.is_object() && params.value("ground_truth_pose", false);
    if (!bypass && !learned_) return ModeRequestResult::MissingModel;
  }
  queue_.push_back(SetMode{mode, params});
  return ModeRequestResult::Accepted;
}

std::shared_ptr<const SessionSnapshot> Session::snapshot() const {
  std::lock_guard lock(state_mutex_);
  return snapshot_;
}

std::optional<RunRecord> Session::run(std::uint64_t id) const {
  std::lock_guard lock(state_mutex_);
  auto it = runs_.find(id);
  if (it == runs_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::uint8_t> Session::frame_png() const {
  std::vector<std::uint8_t> rgb;
  int w = 0, h = 0;
  {
    std::lock_guard lock(state_mutex_);
    const sim::World& world = autonomy_ ? autonomy_->world() : world_;
    FrameOverlay overlay;
    overlay.track = track_;
    overlay.fence = fence_;
    if (snapshot_->last_tick) overlay.box = snapshot_->last_tick->box;
    rgb = render_frame_rgb(world, overlay);
    w = world.camera().width();
    h = world.camera().height();
  }
  return encode_png(rgb, w, h);
}

std::uint64_t Session::subscribe(TelemetrySink sink) {
  std::lock_guard lock(sink_mutex_);
  sinks_.emplace(next_sink_, std::move(sink));
  return next_sink_++;
}

void Session::unsubscribe(std::uint64_t id) {
  std::lock_guard lock(sink_mutex_);
  sinks_.erase(id);
}

void Session::emit(const std::string& message) {
  std::lock_guard lock(sink_mutex_);
  for (auto& [id, sink] : sinks_) sink(message);
}

bool Session::busy() const {
  {
    std::lock_guard lock(queue_mutex_);
    if (!queue_.empty()) return true;
  }
  std::lock_guard lock(state_mutex_);
  return mode_ != SessionMode::Idle;
}

void Session::apply(Command& cmd) {
  if (auto* f = std::get_if<SetFence>(&cmd)) {
    fence_ = std::move(f->fence);
  } else if (auto* t = std::get_if<SetTrack>(&cmd)) {
    track_ = std::move(t->track);
  } else if (auto* m = std::get_if<SetMode>(&cmd)) {
    finish_activity();
    start_mode(m->mode, m->params);
  }
}

void Session::start_mode(SessionMode mode, const json& params) {
  mode_ = mode;
  switch (mode) {
    case SessionMode::Idle:
      break;
    case SessionMode::CollectSpins: {
      world_.reset(spin_start_pose(world_.camera()), config_.scenario.seed);
      const auto locations = data::default_spin_locations(world_.camera());
      spin_sessions_ = data::run_spin_collection(world_, locations, config_.spin);
      spin_speed_ = data::calibrate_rotation(spin_sessions_);
      mode_ = SessionMode::Idle;
      break;
    }
    case SessionMode::Wander: {
      data::WanderConfig wc = config_.wander;
      if (params.is_object()) {
        wc.duration = params.value("duration", wc.duration);
        if (params.value("use_calibration", false) && spin_speed_) wc.spin_speed = *spin_speed_;
      }
      world_.reset(wander_start_pose(world_.camera(), *fence_), config_.scenario.seed);
      wander_log_.clear();
      labels_.clear();
      wanderer_ = std::make_unique<data::Wanderer>(world_, *fence_, wc, wander_seed(config_));
      break;
    }
    case SessionMode::Autonomy: {
      const bool bypass = params.is_object() && params.value("ground_truth_pose", false);
      autonomy_ = std::make_unique<AutonomyRun>(config_, *track_, bypass ? nullptr : learned_,
                                                static_cast<int>(next_run_));
      break;
    }
  }
}

void Session::finish_activity() {
  if (wanderer_) {
    wander_log_ = wanderer_->take_frames();
    labels_ = data::label_orientations(wander_log_, config_.label);
    wanderer_.reset();
  }
  if (autonomy_) {
    runs_.emplace(next_run_++, autonomy_->take_record());
    autonomy_.reset();
  }
  mode_ = SessionMode::Idle;
}

void Session::advance() {
  std::deque<Command> commands;
  {
    std::lock_guard lock(queue_mutex_);
    commands.swap(queue_);
  }
  std::optional<PipelineTick> produced;
  std::uint64_t run_id = 0;
  {
    std::lock_guard lock(state_mutex_);
    for (auto& cmd : commands) {
      try {
        apply(cmd);
        last_error_.clear();
      } catch (const std::exception& e) {
        last_error_ = e.what();
        wanderer_.reset();
        autonomy_.reset();
        mode_ = SessionMode::Idle;
      }
    }
    run_id = next_run_;
    try {
      if (mode_ == SessionMode::Wander) {
        if (!wanderer_->step()) {
          finish_activity();
        } else {
          const auto& f = wanderer_->frames().back();
          PipelineTick t;
          t.t = f.t;
          t.frame = wanderer_->frames().size() - 1;
          t.box = f.box;
          t.truth = f.truth;
          produced = t;
        }
      } else if (mode_ == SessionMode::Autonomy) {
        const bool more = autonomy_->step();
        produced = autonomy_->record().ticks.back();
        produced->crop.reset();
        if (!more) finish_activity();
      }
    } catch (const std::exception& e) {
      last_error_ = e.what();
      wander_log_ = wanderer_ ? wanderer_->take_frames() : wander_log_;
      wanderer_.reset();
      autonomy_.reset();
      mode_ = SessionMode::Idle;
    }
    ++tick_;
    publish(produced ? &*produced : nullptr);
  }
  if (produced) {
    emit(telemetry_to_json(*produced, run_id).dump());
  }
}

void Session::run_until_idle(std::uint64_t max_ticks) {
  for (std::uint64_t i = 0; i < max_ticks && busy(); ++i) advance();
}

void Session::publish(const PipelineTick* tick) {
  auto s = std::make_shared<SessionSnapshot>();
  s->mode = mode_;
  s->tick = tick_;
  s->time = autonomy_ ? autonomy_->world().time() : world_.time();
  if (tick) {
    s->last_tick = *tick;
  } else if (snapshot_) {
    s->last_tick = snapshot_->last_tick;
  }
  if (fence_) s->fence = fence_->vertices();
  if (track_) s->track = track_->waypoints();
  s->wander_frames = wanderer_ ? wanderer_->frames().size() : wander_log_.size();
  s->labels = labels_.size();
  s->calibrated_spin_speed = spin_speed_;
  s->runs = runs_.size();
  s->model_loaded = learned_ != nullptr;
  s->last_error = last_error_;
  snapshot_ = std::move(s);
}

}  // namespace deskservo::service
